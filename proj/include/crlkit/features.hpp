#pragma once

#include <vector>

#include "crlkit/envs.hpp"
#include "crlkit/rng.hpp"

namespace crl {

/// Mean observation of a task under the uniform exploration policy.
struct FeatureVector {
  VectorXd x;
  int n_states = 0;
};

/// Each coordinate uniform on [-bound, bound].
VectorXd uniform_policy_action(int action_dim, Rng& rng, double bound = 0.1);

/// Runs `m` uniform-policy episodes and averages every visited observation,
/// initial and terminal ones included. If `log` is non-null the raw
/// observation vectors are appended to it in visit order.
FeatureVector extract_feature(const TaskSpec& task, int m, Rng& rng, const EnvConfig& env = {},
                              std::vector<VectorXd>* log = nullptr);

}  // namespace crl
