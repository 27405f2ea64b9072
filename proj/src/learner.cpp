#include "crlkit/learner.hpp"

#include <chrono>
#include <cmath>
#include <optional>
#include <set>

#include "crlkit/errors.hpp"
#include "crlkit/features.hpp"

namespace crl {

namespace {

template <class E>
E parse_enum(const std::string& s, std::initializer_list<E> all, const char* what) {
  for (E e : all)
    if (to_string(e) == s) return e;
  throw ParseError(std::string("unknown ") + what + " '" + s + "'");
}

// Forward activations of the student on one state batch.
struct Pass {
  MatrixXd H;
  nn::ForwardCache shared;
  std::map<int, nn::ForwardCache> heads;
};

Pass forward_pass(const MultiheadPolicy& policy, const MatrixXd& S, const std::set<int>& heads) {
  Pass p;
  p.H = nn::forward_batch(policy.shared, S, &p.shared);
  for (int k : heads) nn::forward_batch(policy.heads[static_cast<std::size_t>(k)].net, p.H, &p.heads[k]);
  return p;
}

const MatrixXd& means_of(const Pass& p, int k) { return p.heads.at(k).values.back(); }

struct Upstream {
  MatrixXd mean;  // d objective / d mean, per column
  VectorXd log_std;
};

PolicyGrad backward_pass(const MultiheadPolicy& policy, const Pass& pass, const std::map<int, Upstream>& ups) {
  PolicyGrad g = PolicyGrad::zeros_like(policy);
  MatrixXd dH = MatrixXd::Zero(pass.H.rows(), pass.H.cols());
  for (const auto& [k, up] : ups) {
    const auto ku = static_cast<std::size_t>(k);
    auto br = nn::backprop_batch(policy.heads[ku].net, pass.heads.at(k), up.mean, true);
    g.heads[ku].net = std::move(br.grad);
    g.heads[ku].log_std = up.log_std;
    dH += br.input_grad;
  }
  g.shared = nn::backprop_batch(policy.shared, pass.shared, dH).grad;
  return g;
}

Upstream reinforce_upstream(const MultiheadPolicy& policy, int head, const Pass& pass, const MatrixXd& actions,
                            const VectorXd& w) {
  const auto& h = policy.heads[static_cast<std::size_t>(head)];
  const Eigen::ArrayXd var = (2.0 * h.log_std).array().exp();
  const Eigen::ArrayXXd diff = actions.array() - means_of(pass, head).array();
  Upstream up;
  up.mean = ((diff.colwise() / var).rowwise() * w.transpose().array()).matrix();
  up.log_std = (((diff.square().colwise() / var) - 1.0).rowwise() * w.transpose().array()).rowwise().sum().matrix();
  return up;
}

// Adds -scale * d L_D / d(student) for every teacher head; returns L_D.
double distill_upstream(const MultiheadPolicy& policy, const MultiheadPolicy& teacher, const Pass& pass,
                        const MatrixXd& S, double scale, std::map<int, Upstream>& ups) {
  const MatrixXd Ht = nn::forward_batch(teacher.shared, S);
  const double n = static_cast<double>(S.cols());
  double loss = 0.0;
  for (int k = 0; k < teacher.K(); ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const auto& hp = policy.heads[ku];
    const auto& hq = teacher.heads[ku];
    const MatrixXd mq = nn::forward_batch(hq.net, Ht);
    const Eigen::ArrayXd vp = (2.0 * hp.log_std).array().exp();
    const Eigen::ArrayXd vq = (2.0 * hq.log_std).array().exp();
    const Eigen::ArrayXXd diff = means_of(pass, k).array() - mq.array();
    loss += (hq.log_std - hp.log_std).sum() + (vp / (2.0 * vq) - 0.5).sum() +
            (diff.square().colwise() / (2.0 * vq)).sum() / n;
    auto [it, fresh] = ups.try_emplace(k);
    Upstream& up = it->second;
    if (fresh) {
      up.mean = MatrixXd::Zero(diff.rows(), diff.cols());
      up.log_std = VectorXd::Zero(diff.rows());
    }
    up.mean -= (scale / n) * (diff.colwise() / vq).matrix();
    up.log_std -= scale * (vp / vq - 1.0).matrix();
  }
  return loss;
}

std::set<int> range_set(int n) {
  std::set<int> s;
  for (int k = 0; k < n; ++k) s.insert(k);
  return s;
}

void check_batch(const MultiheadPolicy& policy, int head, const std::vector<Trajectory>& batch) {
  if (batch.empty()) throw InputError("policy gradient needs a non-empty batch");
  if (head < 0 || head >= policy.K()) throw IndexError("head out of range");
}

void check_teacher(const MultiheadPolicy& policy, const MultiheadPolicy& teacher, const MatrixXd& states) {
  if (states.cols() == 0) throw InputError("distillation needs at least one state");
  if (teacher.K() > policy.K()) throw PreconditionError("teacher has more heads than the student");
}

bool all_finite(const PolicyGrad& g) {
  for (const auto& t : tensors(g))
    for (double v : t)
      if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace

std::string to_string(Mode m) {
  switch (m) {
    case Mode::DaCoRL: return "dacorl";
    case Mode::Oracle: return "oracle";
    case Mode::Naive: return "naive";
    case Mode::FixedK: return "fixed_k";
  }
  return "?";
}
std::string to_string(Estimator e) { return e == Estimator::RewardToGo ? "reward_to_go" : "total_return"; }
std::string to_string(Baseline b) {
  switch (b) {
    case Baseline::None: return "none";
    case Baseline::BatchMean: return "batch_mean";
    case Baseline::PerStep: return "per_step";
  }
  return "?";
}
std::string to_string(OptimizerKind o) { return o == OptimizerKind::Sgd ? "sgd" : "adam"; }

Mode parse_mode(const std::string& s) {
  return parse_enum(s, {Mode::DaCoRL, Mode::Oracle, Mode::Naive, Mode::FixedK}, "mode");
}
Estimator parse_estimator(const std::string& s) {
  return parse_enum(s, {Estimator::RewardToGo, Estimator::TotalReturn}, "estimator");
}
Baseline parse_baseline(const std::string& s) {
  return parse_enum(s, {Baseline::None, Baseline::BatchMean, Baseline::PerStep}, "baseline");
}
OptimizerKind parse_optimizer(const std::string& s) {
  return parse_enum(s, {OptimizerKind::Sgd, OptimizerKind::Adam}, "optimizer");
}

void LearnerConfig::validate() const {
  auto need = [](bool ok, const char* msg) {
    if (!ok) throw DomainError(msg);
  };
  need(alpha > 0.0, "alpha must be positive");
  need(sigma2 > 0.0, "sigma2 must be positive");
  need(lambda >= 0.0 && lambda <= 1.0, "lambda must lie in [0, 1]");
  need(gamma >= 0.0 && gamma <= 1.0, "gamma must lie in [0, 1]");
  need(beta > 0.0, "beta must be positive");
  need(iterations_per_task >= 1, "iterations_per_task must be at least 1");
  need(batch_size >= 1, "batch_size must be at least 1");
  need(m_explore >= 1, "m_explore must be at least 1");
  need(fixed_k >= 1, "fixed_k must be at least 1");
  need(eval_every >= 1, "eval_every must be at least 1");
  need(eval_episodes >= 1, "eval_episodes must be at least 1");
  need(distill_states >= 0, "distill_states must be non-negative");
  need(shared_hidden >= 1 && head_hidden >= 1, "hidden widths must be positive");
  need(std::isfinite(init_log_std), "init_log_std must be finite");
  need(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 && adam_beta2 < 1.0, "adam betas must lie in [0, 1)");
  need(adam_eps > 0.0, "adam_eps must be positive");
}

VectorXd returns(const VectorXd& rewards, double gamma) {
  if (gamma < 0.0 || gamma > 1.0) throw DomainError("gamma must lie in [0, 1]");
  VectorXd g(rewards.size());
  double acc = 0.0;
  for (Eigen::Index t = rewards.size(); t-- > 0;) {
    acc = rewards[t] + gamma * acc;
    g[t] = acc;
  }
  return g;
}

std::vector<Trajectory> collect(const TaskSpec& task, const MultiheadPolicy& policy, int head, int batch_size,
                                Rng& rng, const EnvConfig& env) {
  if (batch_size < 0) throw InputError("batch_size must be non-negative");
  if (batch_size == 0) return {};
  std::vector<const TaskSpec*> tasks(static_cast<std::size_t>(batch_size), &task);
  return rollout_batch(policy, head, tasks, &rng, env);
}

MatrixXd batch_states(const std::vector<Trajectory>& batch) {
  Eigen::Index n = 0;
  for (const auto& t : batch) n += t.length();
  MatrixXd S(batch.empty() ? 0 : batch.front().observations.rows(), n);
  Eigen::Index c = 0;
  for (const auto& t : batch) {
    S.middleCols(c, t.length()) = t.observations;
    c += t.length();
  }
  return S;
}

static MatrixXd batch_actions(const std::vector<Trajectory>& batch) {
  Eigen::Index n = 0;
  for (const auto& t : batch) n += t.length();
  MatrixXd A(batch.front().actions.rows(), n);
  Eigen::Index c = 0;
  for (const auto& t : batch) {
    A.middleCols(c, t.length()) = t.actions;
    c += t.length();
  }
  return A;
}

VectorXd reinforce_weights(const std::vector<Trajectory>& batch, const ReinforceOptions& options) {
  if (batch.empty()) throw InputError("policy gradient needs a non-empty batch");
  const double n_traj = static_cast<double>(batch.size());
  std::vector<VectorXd> per;
  per.reserve(batch.size());
  Eigen::Index total = 0, longest = 0;
  for (const auto& t : batch) {
    VectorXd g = returns(t.rewards, options.gamma);
    if (options.estimator == Estimator::TotalReturn && g.size() > 0) g.setConstant(g[0]);
    per.push_back(std::move(g));
    total += t.length();
    longest = std::max<Eigen::Index>(longest, t.length());
  }

  VectorXd base = VectorXd::Zero(longest);
  if (options.baseline == Baseline::BatchMean) {
    double b = 0.0;
    if (options.estimator == Estimator::RewardToGo) {
      for (const auto& g : per) b += g.sum();
      b /= static_cast<double>(std::max<Eigen::Index>(total, 1));
    } else {
      for (const auto& g : per) b += g.size() ? g[0] : 0.0;
      b /= n_traj;
    }
    base.setConstant(b);
  } else if (options.baseline == Baseline::PerStep) {
    VectorXd cnt = VectorXd::Zero(longest);
    for (const auto& g : per) {
      base.head(g.size()) += g;
      cnt.head(g.size()).array() += 1.0;
    }
    base.array() /= cnt.array().max(1.0);
  }

  VectorXd w(total);
  Eigen::Index c = 0;
  for (const auto& g : per) {
    w.segment(c, g.size()) = (g - base.head(g.size())) / n_traj;
    c += g.size();
  }
  return w;
}

double reinforce_surrogate(const MultiheadPolicy& policy, int head, const std::vector<Trajectory>& batch,
                           const ReinforceOptions& options) {
  check_batch(policy, head, batch);
  const VectorXd w = reinforce_weights(batch, options);
  const MatrixXd S = batch_states(batch);
  const MatrixXd A = batch_actions(batch);
  const MatrixXd M = head_means(policy, head, S);
  const VectorXd sd = policy.heads[static_cast<std::size_t>(head)].log_std.array().exp();
  double s = 0.0;
  for (Eigen::Index i = 0; i < S.cols(); ++i) s += w[i] * nn::gaussian_log_prob({M.col(i), sd}, A.col(i));
  return s;
}

PolicyGrad reinforce_grad(const MultiheadPolicy& policy, int head, const std::vector<Trajectory>& batch,
                          const ReinforceOptions& options) {
  check_batch(policy, head, batch);
  const MatrixXd S = batch_states(batch);
  const Pass pass = forward_pass(policy, S, {head});
  std::map<int, Upstream> ups;
  ups[head] = reinforce_upstream(policy, head, pass, batch_actions(batch), reinforce_weights(batch, options));
  return backward_pass(policy, pass, ups);
}

double distill_loss(const MultiheadPolicy& policy, const MultiheadPolicy& teacher, const MatrixXd& states) {
  check_teacher(policy, teacher, states);
  double loss = 0.0;
  for (int k = 0; k < teacher.K(); ++k) {
    const MatrixXd mp = head_means(policy, k, states);
    const MatrixXd mq = head_means(teacher, k, states);
    const VectorXd sp = policy.heads[static_cast<std::size_t>(k)].log_std.array().exp();
    const VectorXd sq = teacher.heads[static_cast<std::size_t>(k)].log_std.array().exp();
    double s = 0.0;
    for (Eigen::Index i = 0; i < states.cols(); ++i) s += nn::kl_diag_gaussian({mp.col(i), sp}, {mq.col(i), sq});
    loss += s / static_cast<double>(states.cols());
  }
  return loss;
}

PolicyGrad distill_grad(const MultiheadPolicy& policy, const MultiheadPolicy& teacher, const MatrixXd& states,
                        double* loss) {
  check_teacher(policy, teacher, states);
  const Pass pass = forward_pass(policy, states, range_set(teacher.K()));
  std::map<int, Upstream> ups;
  const double l = distill_upstream(policy, teacher, pass, states, -1.0, ups);
  if (loss) *loss = l;
  return backward_pass(policy, pass, ups);
}

MatrixXd stride_columns(const MatrixXd& states, int n) {
  const Eigen::Index N = states.cols();
  if (n <= 0 || n >= N) return states;
  MatrixXd out(states.rows(), n);
  for (int i = 0; i < n; ++i) out.col(i) = states.col(static_cast<Eigen::Index>(i) * N / n);
  return out;
}

PolicyGrad joint_grad(const MultiheadPolicy& policy, const MultiheadPolicy* teacher, int head,
                      const std::vector<Trajectory>& batch, double lambda, const ReinforceOptions& options,
                      int distill_states, double* loss) {
  check_batch(policy, head, batch);
  const MatrixXd S = batch_states(batch);
  const VectorXd w = reinforce_weights(batch, options);
  const MatrixXd A = batch_actions(batch);
  if (loss) *loss = 0.0;
  const bool distill = teacher != nullptr && teacher->K() > 0 && lambda > 0.0;
  const bool fused = !distill || distill_states <= 0 || distill_states >= S.cols();

  std::set<int> heads{head};
  if (distill && fused) heads.merge(range_set(teacher->K()));
  const Pass pass = forward_pass(policy, S, heads);
  std::map<int, Upstream> ups;
  ups[head] = reinforce_upstream(policy, head, pass, A, w);
  if (!distill) return backward_pass(policy, pass, ups);

  check_teacher(policy, *teacher, S);
  if (fused) {
    const double l = distill_upstream(policy, *teacher, pass, S, lambda, ups);
    if (loss) *loss = l;
    return backward_pass(policy, pass, ups);
  }
  PolicyGrad g = backward_pass(policy, pass, ups);
  const MatrixXd Sd = stride_columns(S, distill_states);
  const Pass dpass = forward_pass(policy, Sd, range_set(teacher->K()));
  std::map<int, Upstream> dups;
  const double l = distill_upstream(policy, *teacher, dpass, Sd, lambda, dups);
  if (loss) *loss = l;
  g += backward_pass(policy, dpass, dups);
  return g;
}

void apply_update(MultiheadPolicy& policy, const PolicyGrad& direction, const LearnerConfig& config,
                  OptimizerState& state) {
  auto params = tensors(policy);
  const auto grads = tensors(direction);
  if (params.size() != grads.size()) throw ShapeError("gradient does not match the policy");
  state.kind = config.optimizer;
  if (config.optimizer == OptimizerKind::Sgd) {
    for (std::size_t i = 0; i < params.size(); ++i)
      for (std::size_t j = 0; j < params[i].size(); ++j) params[i][j] += config.beta * grads[i][j];
    return;
  }
  while (state.m.size() < params.size()) {
    const auto n = static_cast<Eigen::Index>(params[state.m.size()].size());
    state.m.push_back(VectorXd::Zero(n));
    state.v.push_back(VectorXd::Zero(n));
    state.steps.push_back(0);
  }
  const double b1 = config.adam_beta1, b2 = config.adam_beta2;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto n = static_cast<Eigen::Index>(params[i].size());
    Eigen::Map<VectorXd> p(params[i].data(), n);
    Eigen::Map<const VectorXd> g(grads[i].data(), n);
    // Tensors outside this step's objective (idle heads) stay frozen, moments included.
    if (g.isZero(0.0)) continue;
    const auto t = static_cast<double>(++state.steps[i]);
    state.m[i] = b1 * state.m[i] + (1.0 - b1) * g;
    state.v[i] = b2 * state.v[i] + (1.0 - b2) * g.cwiseAbs2();
    const double c1 = 1.0 - std::pow(b1, t), c2 = 1.0 - std::pow(b2, t);
    p.array() += config.beta * (state.m[i].array() / c1) / ((state.v[i].array() / c2).sqrt() + config.adam_eps);
  }
}

LearnerState init_learner(const LearnerConfig& config, int obs_dim, const EnvConfig& env) {
  config.validate();
  LearnerState s;
  s.config = config;
  s.env = env;
  PolicyShape shape;
  shape.obs_dim = obs_dim;
  shape.action_dim = 2;
  shape.shared_hidden = config.shared_hidden;
  shape.head_hidden = config.head_hidden;
  shape.init_log_std = config.init_log_std;
  Rng init(derive_seed(config.seed, kInitTag));
  s.policy = make_policy(shape, init);
  s.registry = make_registry(config.alpha, config.sigma2, config.centroid_update);
  s.optimizer.kind = config.optimizer;
  s.train_rng = Rng(derive_seed(config.seed, kTrainTag));
  return s;
}

SelectionRule selection_rule(const LearnerState& state) {
  SelectionRule r;
  r.single_head = state.config.mode == Mode::Naive;
  if (state.config.mode == Mode::Oracle) r.cluster_heads = state.cluster_heads;
  r.m_explore = state.config.m_explore;
  return r;
}

TraceRecord assign_context(LearnerState& state, const TaskSpec& task) {
  const auto& cfg = state.config;
  const int ti = state.tasks_done;
  TraceRecord tr;
  tr.task_index = ti;
  tr.task_id = task.task_id;
  tr.true_cluster = task.true_cluster;
  if (cfg.mode == Mode::Naive) {
    tr.is_new = ti == 0;
    tr.z_star = 0;
    tr.K_after = 1;
    return tr;
  }

  Rng frng(derive_seed(cfg.seed, kFeatureTag + static_cast<std::uint64_t>(ti)));
  const VectorXd x = extract_feature(task, cfg.m_explore, frng, state.env).x;
  tr.feature = x;
  ContextRegistry& reg = state.registry;

  switch (cfg.mode) {
    case Mode::DaCoRL:
      if (reg.t == 0) {
        reg = seat_first(std::move(reg), x);
        tr.is_new = true;
        tr.z_star = 0;
      } else {
        auto [a, next] = detect(reg, x);
        reg = register_assignment(std::move(next), a);
        tr.is_new = a.is_new;
        tr.z_star = a.z_star;
        tr.posterior = a.posterior;
      }
      break;
    case Mode::Oracle: {
      if (task.true_cluster < 0) throw InputError("oracle mode needs generator cluster labels");
      auto it = state.cluster_heads.find(task.true_cluster);
      if (it == state.cluster_heads.end()) {
        reg = instantiate(std::move(reg), x);
        it = state.cluster_heads.emplace(task.true_cluster, reg.K() - 1).first;
        tr.is_new = true;
      }
      tr.z_star = it->second;
      reg = absorb(std::move(reg), tr.z_star, x);
      break;
    }
    case Mode::FixedK:
      if (reg.K() < cfg.fixed_k) {
        reg = instantiate(std::move(reg), x);
        tr.is_new = true;
        tr.z_star = reg.K() - 1;
      } else {
        tr.z_star = map_context(reg, x);
      }
      reg = absorb(std::move(reg), tr.z_star, x);
      break;
    case Mode::Naive: break;
  }
  tr.K_after = reg.K();
  return tr;
}

void train_task(LearnerState& state, const TaskSpec& task, const TrainHooks& hooks) {
  const auto& cfg = state.config;
  const int ti = state.tasks_done;
  TraceRecord tr = assign_context(state, task);

  if (tr.is_new && ti > 0 && cfg.mode != Mode::Naive) {
    Rng erng(derive_seed(cfg.seed, kExpandTag + static_cast<std::uint64_t>(ti)));
    Rng peek = erng;
    tr.expanded_from = expansion_source(state.policy, cfg.head_init, state.registry, peek);
    std::optional<MultiheadPolicy> before;
    if (hooks.on_expand) before = state.policy;
    state.policy = expand(std::move(state.policy), cfg.head_init, state.registry, erng);
    if (hooks.on_expand) hooks.on_expand(state, *before);
  }
  if (cfg.mode != Mode::Naive && state.policy.K() != state.registry.K())
    throw LogicError("head count diverged from the context count");

  std::optional<MultiheadPolicy> teacher;
  if (ti > 0 && cfg.mode != Mode::Naive && cfg.lambda > 0.0) teacher = snapshot(state.policy);
  const ReinforceOptions ropts{cfg.gamma, cfg.estimator, cfg.baseline};

  for (int it = 0; it < cfg.iterations_per_task; ++it) {
    const auto batch = collect(task, state.policy, tr.z_star, cfg.batch_size, state.train_rng, state.env);
    double mean_return = 0.0;
    for (const auto& t : batch) mean_return += t.total_return();
    mean_return /= static_cast<double>(batch.size());

    double ld = 0.0;
    const PolicyGrad g = joint_grad(state.policy, teacher ? &*teacher : nullptr, tr.z_star, batch, cfg.lambda, ropts,
                                    cfg.distill_states, &ld);
    if (!all_finite(g) || !std::isfinite(ld))
      throw EvaluationError("non-finite gradient at task " + std::to_string(ti) + " iteration " + std::to_string(it) +
                            " (mean return " + std::to_string(mean_return) + ", L_D " + std::to_string(ld) + ")");
    apply_update(state.policy, g, cfg, state.optimizer);

    IterationLog log{ti, task.task_id, it, state.global_iteration, tr.z_star, mean_return, ld};
    state.record.train_log.push_back(log);
    if (it == 0) state.record.forward_transfer.push_back(mean_return);
    ++state.global_iteration;
    if (hooks.on_iteration) hooks.on_iteration(state, log);
    if (state.global_iteration % cfg.eval_every == 0 && hooks.on_eval) hooks.on_eval(state);
  }

  state.record.assignments.push_back(tr.z_star);
  state.record.trace.push_back(std::move(tr));
  state.record.K_T = state.policy.K();
  ++state.tasks_done;
}

double evaluate_stream(const LearnerState& state, const std::vector<TaskSpec>& tasks) {
  Rng rng(derive_seed(state.config.seed ^ kEvalTag, static_cast<std::uint64_t>(state.global_iteration)));
  TestOptions opt{state.config.eval_episodes, state.config.eval_stochastic, state.env};
  return test_all(state.policy, state.registry, selection_rule(state), tasks, rng, opt).r_ave;
}

void continue_stream(LearnerState& state, const TaskStream& stream, const TrainHooks& hooks,
                     const std::function<void(const LearnerState&)>& on_task_end) {
  TrainHooks h = hooks;
  h.on_eval = [&](LearnerState& s) {
    s.record.r_ave_series.push_back({s.global_iteration, s.tasks_done, evaluate_stream(s, stream.tasks)});
    if (hooks.on_eval) hooks.on_eval(s);
  };
  const auto start = std::chrono::steady_clock::now();
  while (state.tasks_done < static_cast<int>(stream.tasks.size())) {
    train_task(state, stream.tasks[static_cast<std::size_t>(state.tasks_done)], h);
    if (on_task_end) on_task_end(state);
  }
  state.record.wall_time += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  state.record.K_T = state.policy.K();
  if (!state.record.r_ave_series.empty()) state.record.r_bar_ave = aggregate(state.record);
}

RunRecord run_stream(const LearnerConfig& config, const TaskStream& stream, const TrainHooks& hooks) {
  if (stream.tasks.empty()) throw InputError("stream has no tasks");
  LearnerState state = init_learner(config, static_cast<int>(2 + stream.tasks.front().variation_params.size()), stream.env);
  continue_stream(state, stream, hooks);
  return std::move(state.record);
}

int detect_only_contexts(const LearnerConfig& config, const TaskStream& stream) {
  if (stream.tasks.empty()) throw InputError("stream has no tasks");
  LearnerState state = init_learner(config, static_cast<int>(2 + stream.tasks.front().variation_params.size()), stream.env);
  for (const auto& t : stream.tasks) {
    assign_context(state, t);
    ++state.tasks_done;
  }
  return config.mode == Mode::Naive ? 1 : state.registry.K();
}

}  // namespace crl
