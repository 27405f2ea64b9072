#pragma once

#include <vector>

#include "crlkit/envs.hpp"
#include "crlkit/policy.hpp"
#include "crlkit/rng.hpp"

namespace crl {

/// One episode. Column j of `observations` is the state the j-th action was
/// taken in; the terminal observation is not stored.
struct Trajectory {
  MatrixXd observations;  // obs_dim x L
  MatrixXd actions;       // action_dim x L, as sampled (before env clipping)
  VectorXd rewards;       // L
  VectorXd log_probs;     // L, under the behavior head at sampling time

  int length() const { return static_cast<int>(rewards.size()); }
  double total_return() const { return rewards.sum(); }
};

/// Runs one episode per entry of `tasks` in lockstep with a single head.
/// With `rng` null actions are the distribution means and log_probs are
/// still filled in; otherwise actions are sampled, episode-major per step.
std::vector<Trajectory> rollout_batch(const MultiheadPolicy& policy, int head, const std::vector<const TaskSpec*>& tasks,
                                      Rng* rng, const EnvConfig& env = {});

}  // namespace crl
