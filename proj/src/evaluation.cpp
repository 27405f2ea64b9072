#include "crlkit/evaluation.hpp"

#include "crlkit/errors.hpp"
#include "crlkit/features.hpp"
#include "crlkit/rollout.hpp"

namespace crl {

int select_policy(const MultiheadPolicy& policy, const ContextRegistry& registry, const TaskSpec& task, int m_explore,
                  Rng& rng, const EnvConfig& env) {
  if (registry.K() != policy.K()) throw PreconditionError("registry and policy disagree on the number of contexts");
  if (policy.K() == 1) return 0;
  const FeatureVector f = extract_feature(task, m_explore, rng, env);
  return map_context(registry, f.x);
}

int choose_head(const MultiheadPolicy& policy, const ContextRegistry& registry, const SelectionRule& rule,
                const TaskSpec& task, Rng& rng, const EnvConfig& env) {
  if (rule.single_head) return 0;
  if (auto it = rule.cluster_heads.find(task.true_cluster); it != rule.cluster_heads.end()) return it->second;
  return select_policy(policy, registry, task, rule.m_explore, rng, env);
}

TestResult test_all(const MultiheadPolicy& policy, const ContextRegistry& registry, const SelectionRule& rule,
                    const std::vector<TaskSpec>& tasks, Rng& rng, const TestOptions& options) {
  if (options.episodes < 1) throw InputError("test_all needs at least one episode per task");
  if (tasks.empty()) throw InputError("test_all needs at least one task");
  TestResult res;
  res.heads.reserve(tasks.size());
  for (const auto& t : tasks) res.heads.push_back(choose_head(policy, registry, rule, t, rng, options.env));
  res.returns.assign(tasks.size(), {});

  // Group episodes by head so each group runs as one lockstep batch.
  // With mean actions every episode of a task is the same, so one rollout
  // per task stands for all of them.
  const int per_task = options.stochastic ? options.episodes : 1;
  for (int k = 0; k < policy.K(); ++k) {
    std::vector<const TaskSpec*> batch;
    std::vector<std::size_t> owner;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      if (res.heads[i] != k) continue;
      for (int e = 0; e < per_task; ++e) {
        batch.push_back(&tasks[i]);
        owner.push_back(i);
      }
    }
    if (batch.empty()) continue;
    auto trajs = rollout_batch(policy, k, batch, options.stochastic ? &rng : nullptr, options.env);
    for (std::size_t j = 0; j < trajs.size(); ++j) res.returns[owner[j]].push_back(trajs[j].total_return());
  }
  if (!options.stochastic)
    for (auto& r : res.returns) r.assign(static_cast<std::size_t>(options.episodes), r.front());

  double total = 0.0;
  for (const auto& r : res.returns)
    for (double v : r) total += v;
  res.r_ave = total / (static_cast<double>(tasks.size()) * options.episodes);
  return res;
}

double generalization_eval(const MultiheadPolicy& policy, const ContextRegistry& registry, const SelectionRule& rule,
                           StreamType type, int n_tasks, std::uint64_t seed, const TestOptions& options,
                           const StreamOptions& stream) {
  if (n_tasks < 1) throw InputError("generalization needs at least one task");
  StreamOptions opt = stream;
  opt.env = options.env;
  const auto tasks = sample_uniform_tasks(type, n_tasks, seed, opt);
  Rng rng(derive_seed(seed, 0x67656e));
  return test_all(policy, registry, rule, tasks, rng, options).r_ave;
}

}  // namespace crl
