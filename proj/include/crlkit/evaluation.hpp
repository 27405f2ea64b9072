#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "crlkit/context.hpp"
#include "crlkit/envs.hpp"
#include "crlkit/policy.hpp"
#include "crlkit/rng.hpp"

namespace crl {

/// How a trained learner picks a head for a test task.
struct SelectionRule {
  bool single_head = false;          // naive: always head 0
  std::map<int, int> cluster_heads;  // oracle: generator label -> head, MAP otherwise
  int m_explore = 50;
};

/// MAP head: feature of the task under the uniform policy, then
/// argmax_k N(x; mu_k, sigma^2) over the trained contexts. No mutation.
int select_policy(const MultiheadPolicy& policy, const ContextRegistry& registry, const TaskSpec& task, int m_explore,
                  Rng& rng, const EnvConfig& env = {});

int choose_head(const MultiheadPolicy& policy, const ContextRegistry& registry, const SelectionRule& rule,
                const TaskSpec& task, Rng& rng, const EnvConfig& env = {});

struct TestOptions {
  int episodes = 5;
  bool stochastic = false;  // sample actions instead of taking the mean
  EnvConfig env;
};

/// Undiscounted return of every (task, episode) pair, task-major.
struct TestResult {
  double r_ave = 0.0;
  std::vector<int> heads;
  std::vector<std::vector<double>> returns;
};

/// R_ave over all tasks: select a head per task, roll out `episodes`
/// episodes, average the undiscounted returns.
TestResult test_all(const MultiheadPolicy& policy, const ContextRegistry& registry, const SelectionRule& rule,
                    const std::vector<TaskSpec>& tasks, Rng& rng, const TestOptions& options = {});

/// Fresh tasks drawn uniformly over the parameter box, tested with the same
/// protocol (default 100 episodes each). Returns the grand mean.
double generalization_eval(const MultiheadPolicy& policy, const ContextRegistry& registry,
                           const SelectionRule& rule, StreamType type, int n_tasks, std::uint64_t seed,
                           const TestOptions& options = {100, false, {}}, const StreamOptions& stream = {});

}  // namespace crl
