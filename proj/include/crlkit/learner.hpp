#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "crlkit/context.hpp"
#include "crlkit/envs.hpp"
#include "crlkit/evaluation.hpp"
#include "crlkit/policy.hpp"
#include "crlkit/record.hpp"
#include "crlkit/rollout.hpp"

namespace crl {

enum class Mode { DaCoRL, Oracle, Naive, FixedK };
enum class Estimator { RewardToGo, TotalReturn };
enum class Baseline { None, BatchMean, PerStep };
enum class OptimizerKind { Sgd, Adam };

std::string to_string(Mode m);
std::string to_string(Estimator e);
std::string to_string(Baseline b);
std::string to_string(OptimizerKind o);
Mode parse_mode(const std::string& s);
Estimator parse_estimator(const std::string& s);
Baseline parse_baseline(const std::string& s);
OptimizerKind parse_optimizer(const std::string& s);

struct LearnerConfig {
  Mode mode = Mode::DaCoRL;
  // context detection
  double alpha = 0.3;
  double sigma2 = 0.01;
  CentroidUpdate centroid_update = CentroidUpdate::Normalized;
  int m_explore = 50;
  int fixed_k = 4;
  // policy and expansion
  HeadInit head_init = HeadInit::NearestTrained;
  int shared_hidden = 200;
  int head_hidden = 200;
  double init_log_std = -2.302585092994046;
  // optimization
  double lambda = 0.5;
  double beta = 3e-4;
  double gamma = 0.99;
  int iterations_per_task = 1000;
  int batch_size = 10;
  Estimator estimator = Estimator::RewardToGo;
  Baseline baseline = Baseline::BatchMean;
  OptimizerKind optimizer = OptimizerKind::Adam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int distill_states = 100;  // 0 uses every state of the batch
  // evaluation
  int eval_every = 100;
  int eval_episodes = 5;
  bool eval_stochastic = false;
  std::uint64_t seed = 0;

  /// Throws DomainError on out-of-range values.
  void validate() const;
};

/// Discounted reward-to-go G_t = sum_{u >= t} gamma^(u-t) r_u.
VectorXd returns(const VectorXd& rewards, double gamma);

std::vector<Trajectory> collect(const TaskSpec& task, const MultiheadPolicy& policy, int head, int batch_size,
                                Rng& rng, const EnvConfig& env = {});

struct ReinforceOptions {
  double gamma = 0.99;
  Estimator estimator = Estimator::RewardToGo;
  Baseline baseline = Baseline::BatchMean;
};

/// Per-step score weights (G_t - b) / N in batch order.
VectorXd reinforce_weights(const std::vector<Trajectory>& batch, const ReinforceOptions& options);

/// Surrogate (1/N) sum_n sum_t (G_t - b) log pi(a_t | s_t) at the current
/// parameters; its gradient is reinforce_grad.
double reinforce_surrogate(const MultiheadPolicy& policy, int head, const std::vector<Trajectory>& batch,
                           const ReinforceOptions& options = {});

PolicyGrad reinforce_grad(const MultiheadPolicy& policy, int head, const std::vector<Trajectory>& batch,
                          const ReinforceOptions& options = {});

/// L_D = sum over teacher heads of the mean over states of KL(student || teacher).
double distill_loss(const MultiheadPolicy& policy, const MultiheadPolicy& teacher, const MatrixXd& states);

PolicyGrad distill_grad(const MultiheadPolicy& policy, const MultiheadPolicy& teacher, const MatrixXd& states,
                        double* loss = nullptr);

/// reinforce_grad - lambda * distill_grad. Distillation uses the batch's
/// own states, or `distill_states` of them at an even stride when that is
/// positive and smaller than the batch. `teacher` may be null.
PolicyGrad joint_grad(const MultiheadPolicy& policy, const MultiheadPolicy* teacher, int head,
                      const std::vector<Trajectory>& batch, double lambda, const ReinforceOptions& options,
                      int distill_states = 0, double* loss = nullptr);

/// Evenly strided subset of `n` columns (all columns if n <= 0 or n >= cols).
MatrixXd stride_columns(const MatrixXd& states, int n);

/// Observations of a batch as columns, in batch order.
MatrixXd batch_states(const std::vector<Trajectory>& batch);

struct OptimizerState {
  OptimizerKind kind = OptimizerKind::Sgd;
  std::vector<std::int64_t> steps;  // per tensor, Adam only
  std::vector<VectorXd> m;
  std::vector<VectorXd> v;
};

/// Ascent step theta += beta * direction (Adam rescales the direction).
/// Adam moments grow with the policy; new heads start from zero moments.
void apply_update(MultiheadPolicy& policy, const PolicyGrad& direction, const LearnerConfig& config,
                  OptimizerState& state);

/// Everything needed to continue a run at a task boundary.
struct LearnerState {
  LearnerConfig config;
  EnvConfig env;
  MultiheadPolicy policy;
  ContextRegistry registry;
  OptimizerState optimizer;
  Rng train_rng;
  int tasks_done = 0;
  std::int64_t global_iteration = 0;
  std::map<int, int> cluster_heads;  // oracle mode
  RunRecord record;
};

LearnerState init_learner(const LearnerConfig& config, int obs_dim, const EnvConfig& env = {});

struct TrainHooks {
  /// Called after an expansion with the policy as it was just before.
  std::function<void(const LearnerState&, const MultiheadPolicy& before)> on_expand;
  /// Called whenever global_iteration hits a multiple of eval_every.
  std::function<void(LearnerState&)> on_eval;
  /// Called after every iteration.
  std::function<void(const LearnerState&, const IterationLog&)> on_iteration;
};

SelectionRule selection_rule(const LearnerState& state);

/// Context assignment for the next task, without any training. Updates the
/// registry (and oracle map) and returns the trace record.
TraceRecord assign_context(LearnerState& state, const TaskSpec& task);

/// Assignment, expansion, teacher snapshot and iterations_per_task updates.
void train_task(LearnerState& state, const TaskSpec& task, const TrainHooks& hooks = {});

/// R_ave over the stream at the current parameters, with the evaluation
/// RNG keyed on (seed, global_iteration).
double evaluate_stream(const LearnerState& state, const std::vector<TaskSpec>& tasks);

/// Trains on tasks [state.tasks_done, end) and evaluates every eval_every
/// iterations. `on_task_end` runs after each task (used for checkpoints).
void continue_stream(LearnerState& state, const TaskStream& stream, const TrainHooks& hooks = {},
                     const std::function<void(const LearnerState&)>& on_task_end = {});

RunRecord run_stream(const LearnerConfig& config, const TaskStream& stream, const TrainHooks& hooks = {});

/// Context count the detector reaches on a stream without training.
int detect_only_contexts(const LearnerConfig& config, const TaskStream& stream);

/// Seed tags for the derived RNG streams.
inline constexpr std::uint64_t kFeatureTag = 0x6665617400000000ULL;
inline constexpr std::uint64_t kExpandTag = 0x6578706100000000ULL;
inline constexpr std::uint64_t kEvalTag = 0x6576616c00000000ULL;
inline constexpr std::uint64_t kTrainTag = 0x747261696e000000ULL;
inline constexpr std::uint64_t kInitTag = 0x696e697400000000ULL;

}  // namespace crl
