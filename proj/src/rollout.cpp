#include "crlkit/rollout.hpp"

#include <cmath>

#include "crlkit/errors.hpp"

namespace crl {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;

struct Episode {
  const TaskSpec* task = nullptr;
  EnvState state;
  Observation obs;
  std::vector<double> obs_buf, act_buf, rewards, log_probs;
  bool done = false;
};

}  // namespace

std::vector<Trajectory> rollout_batch(const MultiheadPolicy& policy, int head, const std::vector<const TaskSpec*>& tasks,
                                      Rng* rng, const EnvConfig& env) {
  if (head < 0 || head >= policy.K()) throw IndexError("rollout head out of range");
  const int od = policy.shape.obs_dim;
  const int ad = policy.shape.action_dim;
  const auto& h = policy.heads[static_cast<std::size_t>(head)];
  const VectorXd stddev = h.log_std.array().exp();
  const double log_std_sum = h.log_std.sum();

  std::vector<Episode> eps(tasks.size());
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    eps[i].task = tasks[i];
    auto [s, o] = reset(*tasks[i], env);
    if (o.size() != od) throw ShapeError("task observation size does not match the policy");
    eps[i].state = s;
    eps[i].obs = std::move(o);
  }

  std::vector<std::size_t> active(tasks.size());
  for (std::size_t i = 0; i < active.size(); ++i) active[i] = i;
  MatrixXd O;
  VectorXd a(ad);
  while (!active.empty()) {
    O.resize(od, static_cast<Eigen::Index>(active.size()));
    for (std::size_t j = 0; j < active.size(); ++j) {
      const auto& e = eps[active[j]];
      O(0, static_cast<Eigen::Index>(j)) = e.obs.position.x();
      O(1, static_cast<Eigen::Index>(j)) = e.obs.position.y();
      O.col(static_cast<Eigen::Index>(j)).tail(od - 2) = e.obs.aug;
    }
    const MatrixXd M = nn::forward_batch(h.net, nn::forward_batch(policy.shared, O));

    std::vector<std::size_t> still;
    still.reserve(active.size());
    for (std::size_t j = 0; j < active.size(); ++j) {
      Episode& e = eps[active[j]];
      double lp = -log_std_sum - ad * kHalfLog2Pi;
      for (int d = 0; d < ad; ++d) {
        const double mu = M(d, static_cast<Eigen::Index>(j));
        if (rng) {
          const double z = rng->normal();
          a[d] = mu + stddev[d] * z;
          lp -= 0.5 * z * z;
        } else {
          a[d] = mu;
        }
      }
      if (!a.allFinite()) throw EvaluationError("policy produced a non-finite action");
      for (int r = 0; r < od; ++r) e.obs_buf.push_back(O(r, static_cast<Eigen::Index>(j)));
      for (int d = 0; d < ad; ++d) e.act_buf.push_back(a[d]);
      e.log_probs.push_back(lp);
      StepResult r = step(*e.task, e.state, a, env);
      e.rewards.push_back(r.reward);
      e.state = r.state;
      e.obs = std::move(r.observation);
      if (!r.done) still.push_back(active[j]);
    }
    active.swap(still);
  }

  std::vector<Trajectory> out(eps.size());
  for (std::size_t i = 0; i < eps.size(); ++i) {
    auto& e = eps[i];
    const auto L = static_cast<Eigen::Index>(e.rewards.size());
    out[i].observations = Eigen::Map<MatrixXd>(e.obs_buf.data(), od, L);
    out[i].actions = Eigen::Map<MatrixXd>(e.act_buf.data(), ad, L);
    out[i].rewards = Eigen::Map<VectorXd>(e.rewards.data(), L);
    out[i].log_probs = Eigen::Map<VectorXd>(e.log_probs.data(), L);
  }
  return out;
}

}  // namespace crl
