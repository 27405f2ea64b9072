#include "crlkit/numkit.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "crlkit/errors.hpp"

namespace crl::nn {

namespace {

void apply_activation(Activation act, MatrixXd& z) {
  if (act == Activation::Relu) z = z.cwiseMax(0.0);
}

void check_dist(const GaussianActionDist& d) {
  if (d.mean.size() != d.stddev.size()) throw ShapeError("gaussian: mean/stddev length mismatch");
  if ((d.stddev.array() <= 0.0).any() || !d.stddev.allFinite())
    throw DomainError("gaussian: stddev must be strictly positive");
}

}  // namespace

Eigen::Index DenseNet::in_dim() const { return layers.empty() ? 0 : layers.front().weight.cols(); }

Eigen::Index DenseNet::out_dim() const { return layers.empty() ? 0 : layers.back().weight.rows(); }

std::size_t DenseNet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

void DenseNet::validate() const {
  if (layers.empty()) throw ShapeError("dense net has no layers");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    if (l.bias.size() != l.weight.rows())
      throw ShapeError("layer " + std::to_string(i) + ": bias length does not match output width");
    if (i + 1 < layers.size() && layers[i + 1].weight.cols() != l.weight.rows())
      throw ShapeError("layer " + std::to_string(i) + " does not chain into layer " + std::to_string(i + 1));
    if (!l.weight.allFinite() || !l.bias.allFinite())
      throw DomainError("layer " + std::to_string(i) + " has non-finite entries");
  }
}

GradientBundle GradientBundle::zeros_like(const DenseNet& net) {
  GradientBundle g;
  g.layers.reserve(net.layers.size());
  for (const auto& l : net.layers)
    g.layers.push_back({MatrixXd::Zero(l.weight.rows(), l.weight.cols()), VectorXd::Zero(l.bias.size())});
  return g;
}

GradientBundle& GradientBundle::operator+=(const GradientBundle& other) {
  if (other.layers.size() != layers.size()) throw ShapeError("gradient bundles differ in depth");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    layers[i].weight += other.layers[i].weight;
    layers[i].bias += other.layers[i].bias;
  }
  return *this;
}

GradientBundle& GradientBundle::operator*=(double s) {
  for (auto& l : layers) {
    l.weight *= s;
    l.bias *= s;
  }
  return *this;
}

bool GradientBundle::is_zero() const {
  for (const auto& l : layers)
    if (!l.weight.isZero(0.0) || !l.bias.isZero(0.0)) return false;
  return true;
}

DenseNet make_dense_net(std::span<const int> sizes, Activation hidden, Activation output, Rng& rng) {
  if (sizes.size() < 2) throw ShapeError("need at least input and output widths");
  DenseNet net;
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    const int in = sizes[i];
    const int out = sizes[i + 1];
    if (in <= 0 || out <= 0) throw ShapeError("layer widths must be positive");
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    DenseLayer layer;
    layer.weight.resize(out, in);
    // Row-major fill so the draw order matches the serialized layout.
    for (int r = 0; r < out; ++r)
      for (int c = 0; c < in; ++c) layer.weight(r, c) = rng.uniform(-limit, limit);
    layer.bias = VectorXd::Zero(out);
    layer.activation = (i + 2 == sizes.size()) ? output : hidden;
    net.layers.push_back(std::move(layer));
  }
  return net;
}

MatrixXd forward_batch(const DenseNet& net, const MatrixXd& inputs, ForwardCache* cache) {
  if (net.layers.empty()) throw ShapeError("dense net has no layers");
  if (inputs.rows() != net.in_dim())
    throw ShapeError("input width " + std::to_string(inputs.rows()) + " does not match net input " +
                     std::to_string(net.in_dim()));
  // Activations are moved into the cache; only the final output is copied out.
  std::vector<MatrixXd> local;
  std::vector<MatrixXd>& values = cache ? cache->values : local;
  values.clear();
  values.reserve(net.layers.size() + 1);
  values.push_back(inputs);
  for (const auto& l : net.layers) {
    const MatrixXd& x = values.back();
    MatrixXd z(l.weight.rows(), x.cols());
    z.noalias() = l.weight * x;
    z.colwise() += l.bias;
    apply_activation(l.activation, z);
    values.push_back(std::move(z));
  }
  if (!cache) return std::move(values.back());
  return values.back();
}

VectorXd forward(const DenseNet& net, const VectorXd& input) {
  if (net.layers.empty()) throw ShapeError("dense net has no layers");
  if (input.size() != net.in_dim())
    throw ShapeError("input length " + std::to_string(input.size()) + " does not match net input " +
                     std::to_string(net.in_dim()));
  VectorXd x = input;
  for (const auto& l : net.layers) {
    VectorXd z(l.weight.rows());
    z.noalias() = l.weight * x;
    z += l.bias;
    if (l.activation == Activation::Relu) z = z.cwiseMax(0.0);
    x = std::move(z);
  }
  return x;
}

BackwardResult backprop_batch(const DenseNet& net, const ForwardCache& cache, const MatrixXd& upstream,
                              bool want_input_grad) {
  const std::size_t depth = net.layers.size();
  if (cache.values.size() != depth + 1) throw ShapeError("forward cache does not match net depth");
  if (upstream.rows() != net.out_dim() || upstream.cols() != cache.values.back().cols())
    throw ShapeError("upstream gradient shape does not match net output");

  BackwardResult result;
  result.grad.layers.resize(depth);
  MatrixXd delta = upstream;
  for (std::size_t i = depth; i-- > 0;) {
    const auto& l = net.layers[i];
    if (l.activation == Activation::Relu)
      delta = (cache.values[i + 1].array() > 0.0).select(delta, 0.0);
    const MatrixXd& below = cache.values[i];
    auto& g = result.grad.layers[i];
    g.weight.noalias() = delta * below.transpose();
    g.bias = delta.rowwise().sum();
    if (i > 0 || want_input_grad) {
      MatrixXd next(l.weight.cols(), delta.cols());
      next.noalias() = l.weight.transpose() * delta;
      delta = std::move(next);
    }
  }
  if (want_input_grad) result.input_grad = std::move(delta);
  return result;
}

GradientBundle backprop(const DenseNet& net, const VectorXd& input, const VectorXd& upstream) {
  ForwardCache cache;
  forward_batch(net, input, &cache);
  return backprop_batch(net, cache, upstream).grad;
}

double gaussian_log_prob(const GaussianActionDist& dist, const VectorXd& action) {
  check_dist(dist);
  if (action.size() != dist.mean.size()) throw ShapeError("action length does not match distribution");
  constexpr double half_log_2pi = 0.91893853320467274178;
  double lp = 0.0;
  for (Eigen::Index i = 0; i < action.size(); ++i) {
    const double z = (action[i] - dist.mean[i]) / dist.stddev[i];
    lp += -0.5 * z * z - std::log(dist.stddev[i]) - half_log_2pi;
  }
  return lp;
}

double kl_diag_gaussian(const GaussianActionDist& p, const GaussianActionDist& q) {
  check_dist(p);
  check_dist(q);
  if (p.mean.size() != q.mean.size()) throw ShapeError("kl: distributions differ in dimension");
  double kl = 0.0;
  for (Eigen::Index i = 0; i < p.mean.size(); ++i) {
    const double vp = p.stddev[i] * p.stddev[i];
    const double vq = q.stddev[i] * q.stddev[i];
    const double dm = p.mean[i] - q.mean[i];
    kl += std::log(q.stddev[i] / p.stddev[i]) + (vp + dm * dm) / (2.0 * vq) - 0.5;
  }
  return kl;
}

VectorXd flatten(const DenseNet& net) {
  VectorXd flat(static_cast<Eigen::Index>(net.parameter_count()));
  Eigen::Index k = 0;
  for (const auto& l : net.layers) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) flat[k++] = l.weight(r, c);
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) flat[k++] = l.bias[r];
  }
  return flat;
}

void unflatten(const VectorXd& flat, DenseNet& net) {
  if (flat.size() != static_cast<Eigen::Index>(net.parameter_count()))
    throw ShapeError("flat parameter vector has the wrong length");
  Eigen::Index k = 0;
  for (auto& l : net.layers) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = flat[k++];
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias[r] = flat[k++];
  }
}

VectorXd flatten(const GradientBundle& grad) {
  Eigen::Index n = 0;
  for (const auto& l : grad.layers) n += l.weight.size() + l.bias.size();
  VectorXd flat(n);
  Eigen::Index k = 0;
  for (const auto& l : grad.layers) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) flat[k++] = l.weight(r, c);
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) flat[k++] = l.bias[r];
  }
  return flat;
}

GradientCheckReport gradient_check(const VectorXd& params, const std::function<double(const VectorXd&)>& loss,
                                   const VectorXd& analytic, double tol, double step, double floor) {
  if (analytic.size() != params.size()) throw ShapeError("analytic gradient length does not match parameters");
  GradientCheckReport report;
  report.relative_errors.resize(static_cast<std::size_t>(params.size()));
  VectorXd probe = params;
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    probe[i] = params[i] + step;
    const double up = loss(probe);
    probe[i] = params[i] - step;
    const double down = loss(probe);
    probe[i] = params[i];
    if (!std::isfinite(up) || !std::isfinite(down))
      throw EvaluationError("loss is not finite at perturbation of parameter " + std::to_string(i));
    const double numeric = (up - down) / (2.0 * step);
    const double a = analytic[i];
    const double denom = std::max({std::abs(a), std::abs(numeric), floor});
    const double rel = std::abs(a - numeric) / denom;
    report.relative_errors[static_cast<std::size_t>(i)] = rel;
    if (rel > report.max_relative_error) {
      report.max_relative_error = rel;
      report.worst_index = static_cast<std::size_t>(i);
    }
  }
  report.passed = report.max_relative_error <= tol;
  return report;
}

}  // namespace crl::nn
