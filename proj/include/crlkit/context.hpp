#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

namespace crl {

using Eigen::VectorXd;

/// How centroids follow the posterior-weighted log-likelihood gradient.
enum class CentroidUpdate {
  Normalized,  // step along (x - mu); a running mean for hard assignments
  Literal,     // step along (x - mu) / sigma^2
};

/// CRP-prior infinite Gaussian mixture over task features.
/// Context indices are 0-based throughout.
struct ContextRegistry {
  std::vector<VectorXd> mu;
  std::vector<int> counts;
  double alpha = 0.3;
  double sigma2 = 0.01;
  int t = 0;  // tasks seated so far
  CentroidUpdate update = CentroidUpdate::Normalized;

  int K() const { return static_cast<int>(mu.size()); }
  Eigen::Index dim() const { return mu.empty() ? 0 : mu.front().size(); }

  /// Validates alpha > 0, sigma2 > 0 and the count bookkeeping.
  void check() const;
};

struct Assignment {
  int z_star = 0;
  bool is_new = false;
  VectorXd posterior;  // over the K existing contexts plus the potential one
};

ContextRegistry make_registry(double alpha, double sigma2, CentroidUpdate update = CentroidUpdate::Normalized);

/// Seats the very first task in context 0 without inference.
ContextRegistry seat_first(ContextRegistry registry, const VectorXd& x);

/// m_k / (t + alpha) for existing contexts, alpha / (t + alpha) for a new one.
VectorXd crp_prior(const ContextRegistry& registry);

double log_likelihood(const ContextRegistry& registry, const VectorXd& x, int k);

/// N(x; mu_k, sigma^2 I). k == K refers to the potential context centred at x.
double likelihood(const ContextRegistry& registry, const VectorXd& x, int k);

/// Normalized posterior over K + 1 assignments, computed in log space.
VectorXd posterior(const ContextRegistry& registry, const VectorXd& x);

/// One gradient step per context weighted by `post[k]`, with learning rate
/// 1 / (m_k + p_k). `registry` must already contain any kept new context;
/// contexts with a zero count use m = 1.
ContextRegistry update_params(ContextRegistry registry, const VectorXd& x, const VectorXd& post);

/// argmax_k N(x; mu_k, sigma^2) over existing contexts, ties to the lowest index.
int map_context(const ContextRegistry& registry, const VectorXd& x);

/// Incremental detection for one task: potential context, posterior,
/// keep-or-drop decision, centroid update and final MAP assignment.
std::pair<Assignment, ContextRegistry> detect(const ContextRegistry& registry, const VectorXd& x);

/// Seats the task: counts[z*] += 1 and t += 1.
ContextRegistry register_assignment(ContextRegistry registry, const Assignment& assignment);

/// Appends a context at x with zero count (used by supervised modes).
ContextRegistry instantiate(ContextRegistry registry, const VectorXd& x);

/// Running-mean centroid update for a known assignment, then seats the task.
ContextRegistry absorb(ContextRegistry registry, int k, const VectorXd& x);

}  // namespace crl
