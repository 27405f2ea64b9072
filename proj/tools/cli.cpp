#include "crlkit/cli.hpp"

#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "crlkit/checkpoint.hpp"
#include "crlkit/config.hpp"
#include "crlkit/errors.hpp"
#include "crlkit/rundir.hpp"
#include "crlkit/textio.hpp"
#include "crlkit/verify.hpp"

namespace crl {

namespace fs = std::filesystem;

namespace {

std::vector<int> parse_sizes(const std::string& s) {
  std::vector<int> sizes;
  for (const auto& tok : text::split(s, ',')) sizes.push_back(static_cast<int>(text::parse_int(tok)));
  return sizes;
}

std::string label_for(const std::string& run_dir) {
  const auto cfg = fs::path(run_dir) / "config.resolved";
  std::string label = fs::path(run_dir).filename().string();
  if (fs::exists(cfg)) {
    const auto kv = text::parse_key_values(text::read_file(cfg.string()));
    if (auto it = kv.find("mode"); it != kv.end()) label = it->second + " (" + label + ")";
  }
  return label;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Continual RL toolkit: context detection, multihead policies, distillation"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen-stream", "Generate a clustered task stream manifest");
  std::string gen_type, gen_sizes = "12,12,12,14", gen_out;
  std::uint64_t gen_seed = 0;
  double gen_spread = 0.05;
  gen->add_option("--type", gen_type, "Stream type: I, II or III")->required();
  gen->add_option("--seed", gen_seed, "Generator seed");
  gen->add_option("--sizes", gen_sizes, "Comma-separated cluster sizes");
  gen->add_option("--spread", gen_spread, "Cluster spread in parameter space");
  gen->add_option("--out", gen_out, "Output manifest path (stdout if omitted)");

  auto* train = app.add_subcommand("train", "Train over a stream and write a run directory");
  std::string tr_manifest, tr_config, tr_out, tr_resume;
  std::vector<std::string> tr_sets;
  bool tr_no_ckpt = false;
  train->add_option("--manifest", tr_manifest, "Task-stream manifest")->required();
  train->add_option("--config", tr_config, "Config file (key = value)");
  train->add_option("--set", tr_sets, "Config override key=value (repeatable)");
  train->add_option("--out", tr_out, "Run directory")->required();
  train->add_option("--resume", tr_resume, "Checkpoint to resume from");
  train->add_flag("--no-checkpoints", tr_no_ckpt, "Skip per-task checkpoints");

  auto* ev = app.add_subcommand("eval", "R_ave of a checkpoint on a stream");
  std::string ev_ckpt, ev_manifest;
  int ev_episodes = 0;
  ev->add_option("--checkpoint", ev_ckpt, "Checkpoint file")->required();
  ev->add_option("--manifest", ev_manifest, "Task-stream manifest")->required();
  ev->add_option("--episodes", ev_episodes, "Episodes per task (default: the run's setting)");

  auto* gz = app.add_subcommand("generalize", "Mean return on unseen uniformly sampled tasks");
  std::string gz_ckpt, gz_type = "I";
  int gz_tasks = 50, gz_episodes = 100;
  std::uint64_t gz_seed = 12345;
  gz->add_option("--checkpoint", gz_ckpt, "Checkpoint file")->required();
  gz->add_option("--type", gz_type, "Stream type of the fresh tasks");
  gz->add_option("--tasks", gz_tasks, "Number of fresh tasks");
  gz->add_option("--episodes", gz_episodes, "Episodes per task");
  gz->add_option("--seed", gz_seed, "Seed for the fresh tasks");

  auto* rep = app.add_subcommand("report", "CSV and SVG learning curves from run directories");
  std::vector<std::string> rep_runs;
  std::string rep_svg, rep_csv, rep_title = "R_ave";
  rep->add_option("--run", rep_runs, "Run directory (repeatable)")->required();
  rep->add_option("--out", rep_svg, "SVG path (default: <first run>/report.svg)");
  rep->add_option("--csv", rep_csv, "CSV path (default: <first run>/report.csv)");
  rep->add_option("--title", rep_title, "Chart title");

  auto* gc = app.add_subcommand("gradcheck", "Finite-difference verification of every gradient");
  int gc_configs = 100;
  std::uint64_t gc_seed = 1;
  double gc_tol = 1e-4;
  gc->add_option("--configs", gc_configs, "Random configurations");
  gc->add_option("--seed", gc_seed, "Seed");
  gc->add_option("--tol", gc_tol, "Maximum relative error");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*gen) {
      StreamOptions opt;
      opt.sizes = parse_sizes(gen_sizes);
      opt.cluster_spread = gen_spread;
      const auto stream = generate_stream(parse_stream_type(gen_type), gen_seed, opt);
      if (gen_out.empty())
        out << write_manifest(stream);
      else
        save_manifest(stream, gen_out);
      return kExitOk;
    }
    if (*train) {
      const auto stream = load_manifest(tr_manifest);
      TrainRequest req;
      if (!tr_config.empty()) req.config = load_config(tr_config);
      for (const auto& s : tr_sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ParseError("--set expects key=value, got '" + s + "'");
        set_config_value(req.config, std::string(text::trim(s.substr(0, eq))), s.substr(eq + 1));
      }
      req.config.validate();
      req.out_dir = tr_out;
      req.resume_from = tr_resume;
      req.checkpoints = !tr_no_ckpt;
      const auto state = train_run(stream, req);
      out << "tasks " << state.tasks_done << " K_T " << state.record.K_T << " R_bar_ave "
          << text::format_double(state.record.r_bar_ave) << " final R_ave "
          << (state.record.r_ave_series.empty() ? std::string("n/a")
                                                : text::format_double(state.record.r_ave_series.back().r_ave))
          << "\n";
      return kExitOk;
    }
    if (*ev) {
      LearnerState state = load_checkpoint(ev_ckpt);
      const auto stream = load_manifest(ev_manifest);
      if (ev_episodes > 0) state.config.eval_episodes = ev_episodes;
      out << "r_ave " << text::format_double(evaluate_stream(state, stream.tasks)) << "\n";
      return kExitOk;
    }
    if (*gz) {
      const LearnerState state = load_checkpoint(gz_ckpt);
      TestOptions opt{gz_episodes, state.config.eval_stochastic, state.env};
      const double r = generalization_eval(state.policy, state.registry, selection_rule(state),
                                           parse_stream_type(gz_type), gz_tasks, gz_seed, opt);
      out << "generalization " << text::format_double(r) << "\n";
      return kExitOk;
    }
    if (*rep) {
      std::vector<CurveSeries> series;
      for (const auto& run : rep_runs)
        series.push_back(
            {label_for(run), parse_eval_csv(text::read_file((fs::path(run) / "eval.csv").string()))});
      const fs::path first(rep_runs.front());
      text::write_file(rep_svg.empty() ? (first / "report.svg").string() : rep_svg, render_svg(series, rep_title));
      text::write_file(rep_csv.empty() ? (first / "report.csv").string() : rep_csv, report_csv(series));
      return kExitOk;
    }
    if (*gc) {
      const auto s = gradcheck_suite(gc_configs, gc_seed, gc_tol);
      out << describe(s) << "\n";
      return s.passed ? kExitOk : kExitCheckFailed;
    }
  } catch (const IoError& e) {
    err << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace crl
