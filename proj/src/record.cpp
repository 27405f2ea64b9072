#include "crlkit/record.hpp"

#include "crlkit/errors.hpp"

namespace crl {

double aggregate(const RunRecord& record) {
  if (record.r_ave_series.empty()) throw InputError("no R_ave values to aggregate");
  double s = 0.0;
  for (const auto& p : record.r_ave_series) s += p.r_ave;
  return s / static_cast<double>(record.r_ave_series.size());
}

double early_training_return(const RunRecord& record, int n, int first_task) {
  double s = 0.0;
  int count = 0;
  for (const auto& it : record.train_log) {
    if (it.task_index < first_task || it.iteration >= n) continue;
    s += it.mean_return;
    ++count;
  }
  if (count == 0) throw InputError("no training iterations in the requested window");
  return s / count;
}

}  // namespace crl
