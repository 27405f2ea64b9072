#include "crlkit/verify.hpp"

#include <chrono>
#include <cstdio>

namespace crl {

namespace {

struct Draw {
  MultiheadPolicy policy;
  MultiheadPolicy teacher;
  std::vector<Trajectory> batch;
  int head = 0;
  double lambda = 0.5;
  ReinforceOptions ropts;
};

double min_abs_preactivation(const nn::DenseNet& net, const MatrixXd& in) {
  double m = std::numeric_limits<double>::infinity();
  MatrixXd x = in;
  for (const auto& l : net.layers) {
    MatrixXd z = l.weight * x;
    z.colwise() += l.bias;
    if (l.activation == nn::Activation::Relu) {
      m = std::min(m, z.cwiseAbs().minCoeff());
      z = z.cwiseMax(0.0);
    }
    x = std::move(z);
  }
  return m;
}

double kink_distance(const MultiheadPolicy& p, const MatrixXd& S) {
  double m = min_abs_preactivation(p.shared, S);
  const MatrixXd H = shared_features(p, S);
  for (const auto& h : p.heads) m = std::min(m, min_abs_preactivation(h.net, H));
  return m;
}

void jitter_biases(nn::DenseNet& net, Rng& rng) {
  for (auto& l : net.layers)
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias[i] = rng.uniform(-0.3, 0.3);
}

Draw draw(Rng& rng) {
  Draw d;
  PolicyShape shape;
  shape.obs_dim = 2 + static_cast<int>(rng.index(5));
  shape.action_dim = 1 + static_cast<int>(rng.index(2));
  shape.shared_hidden = 3 + static_cast<int>(rng.index(5));
  shape.head_hidden = 3 + static_cast<int>(rng.index(5));
  shape.init_log_std = rng.uniform(-1.0, 0.0);
  d.policy = make_policy(shape, rng);
  const int K = 1 + static_cast<int>(rng.index(3));
  while (d.policy.K() < K) d.policy.heads.push_back(make_head(shape, rng));
  jitter_biases(d.policy.shared, rng);
  for (auto& h : d.policy.heads) {
    jitter_biases(h.net, rng);
    for (Eigen::Index i = 0; i < h.log_std.size(); ++i) h.log_std[i] = rng.uniform(-1.0, 0.0);
  }

  // Teacher: a perturbed copy, possibly missing the newest head.
  d.teacher = d.policy;
  if (K > 1 && rng.uniform(0, 1) < 0.5) d.teacher.heads.pop_back();
  VectorXd flat = flatten(d.teacher);
  for (Eigen::Index i = 0; i < flat.size(); ++i) flat[i] += rng.normal(0.0, 0.1);
  unflatten(flat, d.teacher);

  d.head = static_cast<int>(rng.index(static_cast<std::size_t>(K)));
  d.lambda = rng.uniform(0.0, 1.0);
  d.ropts.gamma = rng.uniform(0.5, 1.0);
  d.ropts.estimator = rng.uniform(0, 1) < 0.5 ? Estimator::RewardToGo : Estimator::TotalReturn;
  d.ropts.baseline = static_cast<Baseline>(rng.index(3));

  const int n_traj = 1 + static_cast<int>(rng.index(3));
  for (int n = 0; n < n_traj; ++n) {
    const int L = 1 + static_cast<int>(rng.index(5));
    Trajectory t;
    t.observations = MatrixXd::NullaryExpr(shape.obs_dim, L, [&] { return rng.uniform(0, 1); });
    t.actions = MatrixXd::NullaryExpr(shape.action_dim, L, [&] { return rng.uniform(-0.5, 0.5); });
    t.rewards = VectorXd::NullaryExpr(L, [&] { return rng.uniform(-1, 0); });
    t.log_probs = VectorXd::Zero(L);
    d.batch.push_back(std::move(t));
  }
  return d;
}

double check(const MultiheadPolicy& at, const std::function<double(const MultiheadPolicy&)>& f, const PolicyGrad& g,
             double tol) {
  MultiheadPolicy probe = at;
  auto loss = [&](const VectorXd& flat) {
    unflatten(flat, probe);
    return f(probe);
  };
  return nn::gradient_check(flatten(at), loss, flatten(g), tol).max_relative_error;
}

}  // namespace

GradcheckSummary gradcheck_suite(int configs, std::uint64_t seed, double tol, double kink_margin) {
  const auto start = std::chrono::steady_clock::now();
  GradcheckSummary s;
  Rng rng(seed);
  while (s.configs < configs) {
    Draw d = draw(rng);
    const MatrixXd S = batch_states(d.batch);
    if (kink_distance(d.policy, S) < kink_margin) {
      ++s.rejected;
      continue;
    }
    ++s.configs;
    const auto& batch = d.batch;
    const int head = d.head;
    const auto ropts = d.ropts;
    const MultiheadPolicy& teacher = d.teacher;

    s.max_reinforce = std::max(
        s.max_reinforce, check(d.policy, [&](const MultiheadPolicy& p) { return reinforce_surrogate(p, head, batch, ropts); },
                               reinforce_grad(d.policy, head, batch, ropts), tol));
    s.max_distill = std::max(
        s.max_distill, check(d.policy, [&](const MultiheadPolicy& p) { return distill_loss(p, teacher, S); },
                             distill_grad(d.policy, teacher, S), tol));
    // Alternate between the fused path and the strided distillation subset.
    const int ds = (s.configs % 2) ? 0 : std::max<int>(1, static_cast<int>(S.cols() / 2));
    const MatrixXd Sd = stride_columns(S, ds);
    const double lambda = d.lambda;
    s.max_joint = std::max(
        s.max_joint,
        check(d.policy,
              [&](const MultiheadPolicy& p) {
                return reinforce_surrogate(p, head, batch, ropts) - lambda * distill_loss(p, teacher, Sd);
              },
              joint_grad(d.policy, &teacher, head, batch, lambda, ropts, ds), tol));
  }
  s.passed = s.max_reinforce <= tol && s.max_distill <= tol && s.max_joint <= tol;
  s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return s;
}

std::string describe(const GradcheckSummary& s) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "configs=%d rejected=%d max_rel_err reinforce=%.3g distill=%.3g joint=%.3g time=%.2fs %s", s.configs,
                s.rejected, s.max_reinforce, s.max_distill, s.max_joint, s.seconds, s.passed ? "PASS" : "FAIL");
  return buf;
}

}  // namespace crl
