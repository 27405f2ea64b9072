#include "crlkit/rundir.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>

#include "crlkit/checkpoint.hpp"
#include "crlkit/config.hpp"
#include "crlkit/errors.hpp"
#include "crlkit/textio.hpp"

namespace crl {

namespace fs = std::filesystem;
using text::format_double;

namespace {

std::string schema_line(const char* name) {
  return std::string("# crlkit ") + name + " v" + std::to_string(kCsvSchemaVersion) + "\n";
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fmt(double v, int prec) {
  std::ostringstream o;
  o.precision(prec);
  o << std::fixed << v;
  return o.str();
}

}  // namespace

std::string eval_csv(const RunRecord& record) {
  std::string out = schema_line("eval") + "global_iteration,task_index,r_ave\n";
  for (const auto& e : record.r_ave_series)
    out += std::to_string(e.global_iteration) + "," + std::to_string(e.task_index) + "," + format_double(e.r_ave) + "\n";
  return out;
}

std::string train_log_csv(const RunRecord& record) {
  std::string out = schema_line("train.log") + "task_index,task_id,iteration,global_iteration,head,mean_return,distill_loss\n";
  for (const auto& l : record.train_log)
    out += std::to_string(l.task_index) + "," + std::to_string(l.task_id) + "," + std::to_string(l.iteration) + "," +
           std::to_string(l.global_iteration) + "," + std::to_string(l.head) + "," + format_double(l.mean_return) +
           "," + format_double(l.distill_loss) + "\n";
  return out;
}

std::string trace_csv(const RunRecord& record) {
  std::string out = schema_line("trace.context") +
                    "task_index,task_id,true_cluster,is_new,z_star,K_after,expanded_from,feature,posterior\n";
  for (const auto& t : record.trace)
    out += std::to_string(t.task_index) + "," + std::to_string(t.task_id) + "," + std::to_string(t.true_cluster) + "," +
           (t.is_new ? "1" : "0") + "," + std::to_string(t.z_star) + "," + std::to_string(t.K_after) + "," +
           std::to_string(t.expanded_from) + "," + text::format_vector(t.feature) + "," +
           text::format_vector(t.posterior) + "\n";
  return out;
}

std::vector<EvalPoint> parse_eval_csv(const std::string& body) {
  std::istringstream in(body);
  std::string line;
  std::vector<EvalPoint> pts;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    if (!header) {
      if (line != "global_iteration,task_index,r_ave") throw ParseError("unexpected eval.csv header '" + line + "'");
      header = true;
      continue;
    }
    const auto cells = text::split(line, ',');
    if (cells.size() != 3) throw ParseError("eval.csv row has " + std::to_string(cells.size()) + " fields");
    pts.push_back({text::parse_int(cells[0]), static_cast<int>(text::parse_int(cells[1])), text::parse_double(cells[2])});
  }
  if (!header) throw ParseError("eval.csv has no header");
  return pts;
}

std::string report_csv(const std::vector<CurveSeries>& series) {
  std::map<std::int64_t, std::vector<std::string>> rows;
  for (std::size_t s = 0; s < series.size(); ++s)
    for (const auto& p : series[s].points) {
      auto& row = rows[p.global_iteration];
      row.resize(series.size());
      row[s] = format_double(p.r_ave);
    }
  std::string out = schema_line("report") + "global_iteration";
  for (const auto& s : series) out += "," + s.label;
  out += "\n";
  for (auto& [it, row] : rows) {
    row.resize(series.size());
    out += std::to_string(it);
    for (const auto& c : row) out += "," + c;
    out += "\n";
  }
  return out;
}

std::string render_svg(const std::vector<CurveSeries>& series, const std::string& title) {
  const double W = 720, H = 420, left = 70, right = 160, top = 40, bottom = 50;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 0;
  bool any = false;
  for (const auto& s : series)
    for (const auto& p : s.points) {
      if (!any) {
        x1 = static_cast<double>(p.global_iteration);
        y0 = y1 = p.r_ave;
        any = true;
      }
      x1 = std::max(x1, static_cast<double>(p.global_iteration));
      y0 = std::min(y0, p.r_ave);
      y1 = std::max(y1, p.r_ave);
    }
  if (y1 - y0 < 1e-9) {
    y0 -= 1.0;
    y1 += 1.0;
  }
  const double pw = W - left - right, ph = H - top - bottom;
  auto sx = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto sy = [&](double y) { return top + (y1 - y) / (y1 - y0) * ph; };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
    << " " << H << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
    << xml_escape(title) << "</text>\n";
  o << "<g stroke=\"#333\" fill=\"none\"><line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw
    << "\" y2=\"" << top + ph << "\"/><line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
    << top + ph << "\"/></g>\n";
  o << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
  for (int i = 0; i <= 5; ++i) {
    const double yv = y0 + (y1 - y0) * i / 5.0, xv = x0 + (x1 - x0) * i / 5.0;
    o << "<text x=\"" << left - 6 << "\" y=\"" << fmt(sy(yv) + 4, 1) << "\" text-anchor=\"end\">" << fmt(yv, 2)
      << "</text>\n";
    o << "<text x=\"" << fmt(sx(xv), 1) << "\" y=\"" << top + ph + 16 << "\" text-anchor=\"middle\">"
      << static_cast<long long>(std::llround(xv)) << "</text>\n";
  }
  o << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">iteration</text>\n";
  o << "<text x=\"16\" y=\"" << top + ph / 2 << "\" transform=\"rotate(-90 16 " << top + ph / 2
    << ")\" text-anchor=\"middle\">R_ave</text>\n</g>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* c = colors[s % 8];
    o << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.6\" points=\"";
    for (const auto& p : series[s].points)
      o << fmt(sx(static_cast<double>(p.global_iteration)), 2) << "," << fmt(sy(p.r_ave), 2) << " ";
    o << "\"/>\n";
    const double ly = top + 14 + 18.0 * static_cast<double>(s);
    o << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 34 << "\" y2=\"" << ly
      << "\" stroke=\"" << c << "\" stroke-width=\"2\"/>";
    o << "<text x=\"" << left + pw + 40 << "\" y=\"" << ly + 4
      << "\" font-family=\"sans-serif\" font-size=\"12\">" << xml_escape(series[s].label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::string checkpoint_path(const std::string& dir, int tasks_done) {
  return (fs::path(dir) / "checkpoints" / ("task_" + std::to_string(tasks_done) + ".ckpt")).string();
}

void write_run_outputs(const std::string& dir, const LearnerState& state) {
  const fs::path root(dir);
  text::write_file((root / "trace.context.csv").string(), trace_csv(state.record));
  text::write_file((root / "train.log.csv").string(), train_log_csv(state.record));
  text::write_file((root / "eval.csv").string(), eval_csv(state.record));
  if (!state.record.r_ave_series.empty())
    text::write_file((root / "report.svg").string(),
                     render_svg({{to_string(state.config.mode), state.record.r_ave_series}},
                                "R_ave, " + to_string(state.config.mode)));
}

LearnerState train_run(const TaskStream& stream, const TrainRequest& request, const TrainHooks& hooks) {
  if (stream.tasks.empty()) throw InputError("stream has no tasks");
  const fs::path root(request.out_dir);
  std::error_code ec;
  fs::create_directories(root / "checkpoints", ec);
  if (ec) throw IoError("cannot create run directory '" + request.out_dir + "': " + ec.message());

  LearnerState state;
  if (request.resume_from.empty()) {
    state = init_learner(request.config, static_cast<int>(2 + stream.tasks.front().variation_params.size()), stream.env);
    state.record.config_echo = write_config(request.config);
  } else {
    state = load_checkpoint(request.resume_from);
    if (state.tasks_done > static_cast<int>(stream.tasks.size()))
      throw InputError("checkpoint is past the end of the stream");
  }
  text::write_file((root / "manifest.txt").string(), write_manifest(stream));
  text::write_file((root / "config.resolved").string(), write_config(state.config));

  continue_stream(state, stream, hooks, [&](const LearnerState& s) {
    if (request.checkpoints) save_checkpoint(s, checkpoint_path(request.out_dir, s.tasks_done));
    write_run_outputs(request.out_dir, s);
  });
  write_run_outputs(request.out_dir, state);
  return state;
}

}  // namespace crl
