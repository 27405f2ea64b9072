#include "crlkit/context.hpp"

#include <cassert>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "crlkit/errors.hpp"

namespace crl {

void ContextRegistry::check() const {
  if (!(alpha > 0.0)) throw DomainError("concentration alpha must be positive");
  if (!(sigma2 > 0.0)) throw DomainError("likelihood variance sigma2 must be positive");
  if (mu.size() != counts.size()) throw LogicError("registry centroid and count lists differ in length");
  if (std::accumulate(counts.begin(), counts.end(), 0) != t) throw LogicError("registry counts do not sum to t");
}

ContextRegistry make_registry(double alpha, double sigma2, CentroidUpdate update) {
  ContextRegistry r;
  r.alpha = alpha;
  r.sigma2 = sigma2;
  r.update = update;
  r.check();
  return r;
}

ContextRegistry seat_first(ContextRegistry registry, const VectorXd& x) {
  if (registry.t != 0) throw PreconditionError("seat_first called on a non-empty registry");
  registry.mu = {x};
  registry.counts = {1};
  registry.t = 1;
  return registry;
}

VectorXd crp_prior(const ContextRegistry& registry) {
  if (registry.t < 1) throw PreconditionError("crp_prior needs at least one seated task");
  const int K = registry.K();
  const double denom = registry.t + registry.alpha;
  VectorXd p(K + 1);
  for (int k = 0; k < K; ++k) p[k] = registry.counts[static_cast<std::size_t>(k)] / denom;
  p[K] = registry.alpha / denom;
  return p;
}

double log_likelihood(const ContextRegistry& registry, const VectorXd& x, int k) {
  if (k < 0 || k > registry.K()) throw InputError("context index " + std::to_string(k) + " out of range");
  const double d = static_cast<double>(x.size());
  const double log_norm = -0.5 * d * std::log(2.0 * std::numbers::pi * registry.sigma2);
  if (k == registry.K()) return log_norm;
  const VectorXd& mu = registry.mu[static_cast<std::size_t>(k)];
  if (mu.size() != x.size()) throw ShapeError("feature dimension does not match context centroid");
  return log_norm - (x - mu).squaredNorm() / (2.0 * registry.sigma2);
}

double likelihood(const ContextRegistry& registry, const VectorXd& x, int k) {
  return std::exp(log_likelihood(registry, x, k));
}

VectorXd posterior(const ContextRegistry& registry, const VectorXd& x) {
  const VectorXd prior = crp_prior(registry);
  const int K = registry.K();
  VectorXd logp(K + 1);
  for (int k = 0; k <= K; ++k) logp[k] = std::log(prior[k]) + log_likelihood(registry, x, k);
  // The potential context term is always finite, so the max is too.
  const double top = logp.maxCoeff();
  assert(std::isfinite(top));
  VectorXd p = (logp.array() - top).exp();
  return p / p.sum();
}

ContextRegistry update_params(ContextRegistry registry, const VectorXd& x, const VectorXd& post) {
  const int K = registry.K();
  if (post.size() < K) throw ShapeError("posterior shorter than the number of contexts");
  for (int k = 0; k < K; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const double p = post[k];
    if (p == 0.0) continue;
    const double m = registry.counts[ku] > 0 ? registry.counts[ku] : 1.0;
    const double eta = 1.0 / (m + p);
    VectorXd grad = x - registry.mu[ku];
    if (registry.update == CentroidUpdate::Literal) grad /= registry.sigma2;
    registry.mu[ku] += eta * p * grad;
  }
  return registry;
}

int map_context(const ContextRegistry& registry, const VectorXd& x) {
  if (registry.K() == 0) throw PreconditionError("no contexts to choose from");
  int best = 0;
  double best_ll = log_likelihood(registry, x, 0);
  for (int k = 1; k < registry.K(); ++k) {
    const double ll = log_likelihood(registry, x, k);
    if (ll > best_ll) {
      best_ll = ll;
      best = k;
    }
  }
  return best;
}

std::pair<Assignment, ContextRegistry> detect(const ContextRegistry& registry, const VectorXd& x) {
  registry.check();
  Assignment a;
  a.posterior = posterior(registry, x);
  const int K = registry.K();
  const double p_new = a.posterior[K];
  a.is_new = K == 0 || (a.posterior.head(K).array() < p_new).all();

  ContextRegistry next = registry;
  if (a.is_new) next = instantiate(std::move(next), x);
  next = update_params(std::move(next), x, a.posterior);
  a.z_star = map_context(next, x);
  return {a, next};
}

ContextRegistry register_assignment(ContextRegistry registry, const Assignment& assignment) {
  if (assignment.z_star < 0 || assignment.z_star >= registry.K())
    throw LogicError("assignment " + std::to_string(assignment.z_star) + " is outside the registry");
  ++registry.counts[static_cast<std::size_t>(assignment.z_star)];
  ++registry.t;
  return registry;
}

ContextRegistry instantiate(ContextRegistry registry, const VectorXd& x) {
  if (registry.K() > 0 && x.size() != registry.dim()) throw ShapeError("feature dimension does not match registry");
  registry.mu.push_back(x);
  registry.counts.push_back(0);
  return registry;
}

ContextRegistry absorb(ContextRegistry registry, int k, const VectorXd& x) {
  if (k < 0 || k >= registry.K()) throw LogicError("absorb: context index out of range");
  const auto ku = static_cast<std::size_t>(k);
  registry.mu[ku] += (x - registry.mu[ku]) / (registry.counts[ku] + 1.0);
  ++registry.counts[ku];
  ++registry.t;
  return registry;
}

}  // namespace crl
