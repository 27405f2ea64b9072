#pragma once

#include <span>
#include <string>
#include <vector>

#include "crlkit/context.hpp"
#include "crlkit/numkit.hpp"
#include "crlkit/rng.hpp"

namespace crl {

using Eigen::MatrixXd;

/// One output head: a hidden layer plus a linear mean layer, and a
/// state-independent log standard deviation.
struct HeadParams {
  nn::DenseNet net;
  VectorXd log_std;
};

struct PolicyShape {
  int obs_dim = 4;
  int action_dim = 2;
  int shared_hidden = 200;
  int head_hidden = 200;
  double init_log_std = -2.302585092994046;  // log(0.5 * 0.2)
};

/// Shared representation feeding K expandable heads.
struct MultiheadPolicy {
  nn::DenseNet shared;
  std::vector<HeadParams> heads;
  PolicyShape shape;

  int K() const { return static_cast<int>(heads.size()); }
  void validate() const;
};

enum class HeadInit { Random, RandomTrained, NearestTrained };

std::string to_string(HeadInit h);
HeadInit parse_head_init(const std::string& text);

MultiheadPolicy make_policy(const PolicyShape& shape, Rng& rng);
HeadParams make_head(const PolicyShape& shape, Rng& rng);

nn::GaussianActionDist act_dist(const MultiheadPolicy& policy, int head, const VectorXd& obs);

/// Shared-layer activations for a column batch of observations.
MatrixXd shared_features(const MultiheadPolicy& policy, const MatrixXd& obs, nn::ForwardCache* cache = nullptr);

/// Action means of one head for a column batch of observations.
MatrixXd head_means(const MultiheadPolicy& policy, int head, const MatrixXd& obs);

/// Head chosen for expansion under a strategy; -1 means fresh random weights.
/// The registry must already hold the new context as its last entry.
int expansion_source(const MultiheadPolicy& policy, HeadInit strategy, const ContextRegistry& registry, Rng& rng);

/// Appends one head. Existing parameters are left untouched.
MultiheadPolicy expand(MultiheadPolicy policy, HeadInit strategy, const ContextRegistry& registry, Rng& rng);

/// Deep copy used as the distillation teacher.
MultiheadPolicy snapshot(const MultiheadPolicy& policy);

/// Gradient of a scalar objective w.r.t. every policy parameter.
struct HeadGrad {
  nn::GradientBundle net;
  VectorXd log_std;
};

struct PolicyGrad {
  nn::GradientBundle shared;
  std::vector<HeadGrad> heads;

  static PolicyGrad zeros_like(const MultiheadPolicy& policy);
  PolicyGrad& operator+=(const PolicyGrad& other);
  PolicyGrad& operator*=(double s);
  bool is_zero() const;
};

/// Flat views in a fixed order: shared layers (weight, bias), then per head
/// its layers (weight, bias) and log_std. Heads are appended last, so the
/// order of existing tensors is stable under expansion.
std::vector<std::span<double>> tensors(MultiheadPolicy& policy);
std::vector<std::span<double>> tensors(PolicyGrad& grad);
std::vector<std::span<const double>> tensors(const MultiheadPolicy& policy);
std::vector<std::span<const double>> tensors(const PolicyGrad& grad);

VectorXd flatten(const MultiheadPolicy& policy);
void unflatten(const VectorXd& flat, MultiheadPolicy& policy);
VectorXd flatten(const PolicyGrad& grad);

/// Bitwise equality of every parameter (and shape).
bool identical(const MultiheadPolicy& a, const MultiheadPolicy& b);
bool identical(const HeadParams& a, const HeadParams& b);

}  // namespace crl
