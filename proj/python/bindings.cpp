#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "crlkit/checkpoint.hpp"
#include "crlkit/config.hpp"
#include "crlkit/context.hpp"
#include "crlkit/envs.hpp"
#include "crlkit/errors.hpp"
#include "crlkit/evaluation.hpp"
#include "crlkit/learner.hpp"
#include "crlkit/platform.hpp"
#include "crlkit/record.hpp"
#include "crlkit/rundir.hpp"
#include "crlkit/verify.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace crl;

namespace {

// Keyword arguments go through the same parser as config files, so names
// and validation match the CLI exactly.
LearnerConfig config_from(const py::kwargs& kw) {
  LearnerConfig c;
  for (const auto& [k, v] : kw) {
    std::string value = py::isinstance<py::bool_>(v) ? (v.cast<bool>() ? "true" : "false") : py::str(v).cast<std::string>();
    set_config_value(c, k.cast<std::string>(), value);
  }
  c.validate();
  return c;
}

StreamOptions stream_options(const std::vector<int>& sizes, double spread) {
  StreamOptions o;
  o.sizes = sizes;
  o.cluster_spread = spread;
  return o;
}

}  // namespace

PYBIND11_MODULE(_crlkit, m) {
  tune_allocator();
  m.doc() = "Continual reinforcement learning with task-context detection";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<InputError>(m, "InputError", base.ptr());

  py::enum_<StreamType>(m, "StreamType").value("I", StreamType::I).value("II", StreamType::II).value("III", StreamType::III);
  py::enum_<Mode>(m, "Mode")
      .value("DaCoRL", Mode::DaCoRL)
      .value("Oracle", Mode::Oracle)
      .value("Naive", Mode::Naive)
      .value("FixedK", Mode::FixedK);

  py::class_<TaskSpec>(m, "TaskSpec")
      .def_readonly("task_id", &TaskSpec::task_id)
      .def_property_readonly("goal", [](const TaskSpec& t) { return VectorXd(t.goal); })
      .def_readonly("variation_params", &TaskSpec::variation_params)
      .def_readonly("true_cluster", &TaskSpec::true_cluster);

  py::class_<TaskStream>(m, "TaskStream")
      .def_readonly("type", &TaskStream::type)
      .def_readonly("seed", &TaskStream::seed)
      .def_readonly("tasks", &TaskStream::tasks)
      .def_readonly("cluster_centers", &TaskStream::cluster_centers)
      .def("__len__", [](const TaskStream& s) { return s.tasks.size(); })
      .def("to_manifest", &write_manifest)
      .def_static("from_manifest", &read_manifest, "text"_a);

  m.def(
      "generate_stream",
      [](StreamType type, std::uint64_t seed, std::vector<int> sizes, double spread) {
        return generate_stream(type, seed, stream_options(sizes, spread));
      },
      "type"_a, "seed"_a, "sizes"_a = std::vector<int>{12, 12, 12, 14}, "spread"_a = 0.05);

  py::class_<LearnerConfig>(m, "LearnerConfig")
      .def(py::init(&config_from))
      .def("to_text", &write_config)
      .def_static("from_text", [](const std::string& text) { return parse_config(text); }, "text"_a)
      .def_readonly("alpha", &LearnerConfig::alpha)
      .def_readonly("sigma2", &LearnerConfig::sigma2)
      .def_readonly("iterations_per_task", &LearnerConfig::iterations_per_task)
      .def_readonly("seed", &LearnerConfig::seed)
      .def("__repr__", &write_config);

  py::class_<EvalPoint>(m, "EvalPoint")
      .def_readonly("global_iteration", &EvalPoint::global_iteration)
      .def_readonly("task_index", &EvalPoint::task_index)
      .def_readonly("r_ave", &EvalPoint::r_ave);

  py::class_<RunRecord>(m, "RunRecord")
      .def_readonly("r_ave_series", &RunRecord::r_ave_series)
      .def_readonly("r_bar_ave", &RunRecord::r_bar_ave)
      .def_readonly("assignments", &RunRecord::assignments)
      .def_readonly("K_T", &RunRecord::K_T)
      .def_readonly("forward_transfer", &RunRecord::forward_transfer)
      .def_readonly("wall_time", &RunRecord::wall_time)
      .def("early_training_return", &early_training_return, "n"_a, "first_task"_a = 0)
      .def("eval_csv", &eval_csv)
      .def("trace_csv", &trace_csv);

  m.def("run_stream", [](const LearnerConfig& c, const TaskStream& s) {
    py::gil_scoped_release release;
    return run_stream(c, s);
  }, "config"_a, "stream"_a);
  m.def("detect_only_contexts", &detect_only_contexts, "config"_a, "stream"_a);

  py::class_<LearnerState>(m, "LearnerState")
      .def_readonly("config", &LearnerState::config)
      .def_readonly("record", &LearnerState::record)
      .def_readonly("tasks_done", &LearnerState::tasks_done)
      .def_property_readonly("K", [](const LearnerState& s) { return s.policy.K(); })
      .def("evaluate", &evaluate_stream, "tasks"_a)
      .def(
          "generalization",
          [](const LearnerState& s, StreamType type, int n_tasks, std::uint64_t seed, int episodes) {
            return generalization_eval(s.policy, s.registry, selection_rule(s), type, n_tasks, seed,
                                       TestOptions{episodes, false, s.env});
          },
          "type"_a = StreamType::I, "n_tasks"_a = 50, "seed"_a = 12345, "episodes"_a = 100)
      .def("save", &save_checkpoint, "path"_a);

  m.def("load_checkpoint", &load_checkpoint, "path"_a);
  m.def(
      "train_run",
      [](const TaskStream& s, const LearnerConfig& c, const std::string& out_dir, const std::string& resume_from,
         bool checkpoints) {
        py::gil_scoped_release release;
        return train_run(s, TrainRequest{c, out_dir, resume_from, checkpoints});
      },
      "stream"_a, "config"_a, "out_dir"_a, "resume_from"_a = "", "checkpoints"_a = true);

  py::class_<ContextRegistry>(m, "ContextRegistry")
      .def_property_readonly("K", &ContextRegistry::K)
      .def_readonly("mu", &ContextRegistry::mu)
      .def_readonly("counts", &ContextRegistry::counts)
      .def_readonly("t", &ContextRegistry::t);
  m.def("make_registry", [](double alpha, double sigma2) { return make_registry(alpha, sigma2); }, "alpha"_a = 0.3,
        "sigma2"_a = 0.01);
  m.def("seat_first", &seat_first, "registry"_a, "x"_a);
  m.def("posterior", &posterior, "registry"_a, "x"_a);
  // Returns (z_star, is_new, posterior, registry) with the task already seated.
  m.def(
      "detect",
      [](const ContextRegistry& r, const VectorXd& x) {
        auto [a, next] = detect(r, x);
        next = register_assignment(std::move(next), a);
        return py::make_tuple(a.z_star, a.is_new, a.posterior, next);
      },
      "registry"_a, "x"_a);

  py::class_<GradcheckSummary>(m, "GradcheckSummary")
      .def_readonly("configs", &GradcheckSummary::configs)
      .def_readonly("max_reinforce", &GradcheckSummary::max_reinforce)
      .def_readonly("max_distill", &GradcheckSummary::max_distill)
      .def_readonly("max_joint", &GradcheckSummary::max_joint)
      .def_readonly("passed", &GradcheckSummary::passed)
      .def("__repr__", &describe);
  m.def("gradcheck", &gradcheck_suite, "configs"_a = 100, "seed"_a = 1, "tol"_a = 1e-4, "kink_margin"_a = 1e-3);
}
