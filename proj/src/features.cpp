#include "crlkit/features.hpp"

#include <limits>

#include "crlkit/errors.hpp"

namespace crl {

VectorXd uniform_policy_action(int action_dim, Rng& rng, double bound) {
  if (action_dim < 1) throw InputError("action_dim must be at least 1");
  VectorXd a(action_dim);
  for (int i = 0; i < action_dim; ++i) a[i] = rng.uniform(-bound, bound);
  return a;
}

FeatureVector extract_feature(const TaskSpec& task, int m, Rng& rng, const EnvConfig& env,
                              std::vector<VectorXd>* log) {
  if (m < 1) throw InputError("extract_feature needs at least one trajectory");
  FeatureVector f;
  const Eigen::Index d = 2 + task.variation_params.size();
  f.x = VectorXd::Zero(d);
  VectorXd lo = VectorXd::Constant(d, std::numeric_limits<double>::infinity());
  VectorXd hi = -lo;
  auto visit = [&](const Observation& obs) {
    VectorXd v = obs.vector();
    f.x += v;
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
    ++f.n_states;
    if (log) log->push_back(std::move(v));
  };
  for (int i = 0; i < m; ++i) {
    auto [state, obs] = reset(task, env);
    visit(obs);
    bool done = false;
    while (!done) {
      auto r = step(task, state, uniform_policy_action(2, rng, env.action_bound), env);
      state = r.state;
      done = r.done;
      visit(r.observation);
    }
  }
  f.x /= static_cast<double>(f.n_states);
  // Rounding in the running sum can leave a constant coordinate one ulp off.
  f.x = f.x.cwiseMax(lo).cwiseMin(hi);
  return f;
}

}  // namespace crl
