#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <vector>

#include "crlkit/rng.hpp"

namespace crl::nn {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class Activation { Identity, Relu };

struct DenseLayer {
  MatrixXd weight;  // out x in
  VectorXd bias;    // out
  Activation activation = Activation::Identity;
};

/// Feed-forward stack of affine layers, each followed by its own activation.
struct DenseNet {
  std::vector<DenseLayer> layers;

  Eigen::Index in_dim() const;
  Eigen::Index out_dim() const;
  std::size_t parameter_count() const;

  /// Throws ShapeError if consecutive layers do not chain, DomainError if
  /// any entry is non-finite.
  void validate() const;
};

struct LayerGrad {
  MatrixXd weight;
  VectorXd bias;
};

/// Gradient with the exact shape of the DenseNet it differentiates.
struct GradientBundle {
  std::vector<LayerGrad> layers;

  static GradientBundle zeros_like(const DenseNet& net);

  GradientBundle& operator+=(const GradientBundle& other);
  GradientBundle& operator*=(double s);
  bool is_zero() const;
};

struct GaussianActionDist {
  VectorXd mean;
  VectorXd stddev;  // elementwise > 0
};

/// Builds a net with layer widths `sizes` (input first). Hidden layers use
/// `hidden`, the last layer uses `output`. Weights are uniform in
/// +-sqrt(6/(fan_in+fan_out)); biases start at zero.
DenseNet make_dense_net(std::span<const int> sizes, Activation hidden, Activation output, Rng& rng);

VectorXd forward(const DenseNet& net, const VectorXd& input);

/// Activations recorded by forward_batch for a later backward pass.
/// `values[0]` is the input; `values[l + 1]` is the output of layer l.
struct ForwardCache {
  std::vector<MatrixXd> values;
};

/// Column-batched forward pass (one sample per column).
MatrixXd forward_batch(const DenseNet& net, const MatrixXd& inputs, ForwardCache* cache = nullptr);

struct BackwardResult {
  GradientBundle grad;
  MatrixXd input_grad;  // empty unless requested
};

/// Reverse-mode gradient of sum over columns of <upstream, output> with
/// respect to every parameter (and optionally the inputs).
BackwardResult backprop_batch(const DenseNet& net, const ForwardCache& cache, const MatrixXd& upstream,
                              bool want_input_grad = false);

GradientBundle backprop(const DenseNet& net, const VectorXd& input, const VectorXd& upstream);

double gaussian_log_prob(const GaussianActionDist& dist, const VectorXd& action);

/// KL[p || q] for diagonal Gaussians.
double kl_diag_gaussian(const GaussianActionDist& p, const GaussianActionDist& q);

// Flat views, in layer order: weight (row-major) then bias.
VectorXd flatten(const DenseNet& net);
void unflatten(const VectorXd& flat, DenseNet& net);
VectorXd flatten(const GradientBundle& grad);

struct GradientCheckReport {
  std::vector<double> relative_errors;
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
  bool passed = false;
};

/// Compares `analytic` against central differences of `loss` around
/// `params`. Relative error per entry is |a - n| / max(|a|, |n|, floor).
GradientCheckReport gradient_check(const VectorXd& params, const std::function<double(const VectorXd&)>& loss,
                                   const VectorXd& analytic, double tol, double step = 1e-5,
                                   double floor = 1e-6);

}  // namespace crl::nn
