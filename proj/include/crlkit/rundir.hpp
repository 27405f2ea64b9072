#pragma once

#include <string>
#include <utility>
#include <vector>

#include "crlkit/learner.hpp"

namespace crl {

inline constexpr int kCsvSchemaVersion = 1;

// Each CSV starts with a `# crlkit <name> v<version>` line, then a fixed header.
std::string eval_csv(const RunRecord& record);
std::string train_log_csv(const RunRecord& record);
std::string trace_csv(const RunRecord& record);

std::vector<EvalPoint> parse_eval_csv(const std::string& body);

struct CurveSeries {
  std::string label;
  std::vector<EvalPoint> points;
};

/// Line chart of R_ave against global iteration, one polyline per series.
std::string render_svg(const std::vector<CurveSeries>& series, const std::string& title);

/// Joins several eval series on global_iteration: one column per label.
std::string report_csv(const std::vector<CurveSeries>& series);

struct TrainRequest {
  LearnerConfig config;
  std::string out_dir;
  std::string resume_from;   // checkpoint path, empty for a fresh run
  bool checkpoints = true;   // write checkpoints/task_{t}.ckpt at each boundary
};

/// Trains on `stream` and maintains the run directory: manifest.txt,
/// config.resolved, trace.context.csv, train.log.csv, eval.csv, report.svg
/// and checkpoints/. Returns the final learner state.
LearnerState train_run(const TaskStream& stream, const TrainRequest& request, const TrainHooks& hooks = {});

/// Rewrites the CSV outputs of a run directory from a learner state.
void write_run_outputs(const std::string& dir, const LearnerState& state);

std::string checkpoint_path(const std::string& dir, int tasks_done);

}  // namespace crl
