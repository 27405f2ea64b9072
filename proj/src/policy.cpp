#include "crlkit/policy.hpp"

#include <cmath>
#include <cstring>
#include <limits>

#include "crlkit/errors.hpp"

namespace crl {

namespace {

void check_head(const MultiheadPolicy& policy, int head) {
  if (head < 0 || head >= policy.K())
    throw IndexError("head " + std::to_string(head) + " out of range (K = " + std::to_string(policy.K()) + ")");
}

template <class Span, class Net>
void push_net(std::vector<Span>& out, Net& net) {
  for (auto& l : net.layers) {
    out.emplace_back(l.weight.data(), static_cast<std::size_t>(l.weight.size()));
    out.emplace_back(l.bias.data(), static_cast<std::size_t>(l.bias.size()));
  }
}

template <class Span, class Policy>
std::vector<Span> policy_tensors(Policy& p) {
  std::vector<Span> out;
  push_net(out, p.shared);
  for (auto& h : p.heads) {
    push_net(out, h.net);
    out.emplace_back(h.log_std.data(), static_cast<std::size_t>(h.log_std.size()));
  }
  return out;
}

template <class Span, class Grad>
std::vector<Span> grad_tensors(Grad& g) {
  std::vector<Span> out;
  push_net(out, g.shared);
  for (auto& h : g.heads) {
    push_net(out, h.net);
    out.emplace_back(h.log_std.data(), static_cast<std::size_t>(h.log_std.size()));
  }
  return out;
}

template <class Spans>
VectorXd concat(const Spans& spans) {
  std::size_t n = 0;
  for (const auto& s : spans) n += s.size();
  VectorXd flat(static_cast<Eigen::Index>(n));
  std::size_t k = 0;
  for (const auto& s : spans) {
    std::copy(s.begin(), s.end(), flat.data() + k);
    k += s.size();
  }
  return flat;
}

bool same_bits(const nn::DenseNet& a, const nn::DenseNet& b) {
  if (a.layers.size() != b.layers.size()) return false;
  for (std::size_t i = 0; i < a.layers.size(); ++i) {
    const auto& x = a.layers[i];
    const auto& y = b.layers[i];
    if (x.weight.rows() != y.weight.rows() || x.weight.cols() != y.weight.cols() || x.activation != y.activation)
      return false;
    if (std::memcmp(x.weight.data(), y.weight.data(), sizeof(double) * static_cast<std::size_t>(x.weight.size())))
      return false;
    if (std::memcmp(x.bias.data(), y.bias.data(), sizeof(double) * static_cast<std::size_t>(x.bias.size())))
      return false;
  }
  return true;
}

}  // namespace

std::string to_string(HeadInit h) {
  switch (h) {
    case HeadInit::Random: return "random";
    case HeadInit::RandomTrained: return "random_trained";
    case HeadInit::NearestTrained: return "nearest_trained";
  }
  return "?";
}

HeadInit parse_head_init(const std::string& text) {
  if (text == "random") return HeadInit::Random;
  if (text == "random_trained") return HeadInit::RandomTrained;
  if (text == "nearest_trained") return HeadInit::NearestTrained;
  throw ParseError("unknown head init strategy '" + text + "'");
}

void MultiheadPolicy::validate() const {
  if (heads.empty()) throw ShapeError("policy has no heads");
  shared.validate();
  if (shared.in_dim() != shape.obs_dim) throw ShapeError("shared layer does not take obs_dim inputs");
  for (const auto& h : heads) {
    h.net.validate();
    if (h.net.in_dim() != shared.out_dim()) throw ShapeError("head input does not match shared output");
    if (h.net.out_dim() != shape.action_dim || h.log_std.size() != shape.action_dim)
      throw ShapeError("head output does not match action_dim");
    if (h.net.layers.size() != heads.front().net.layers.size()) throw ShapeError("heads differ in depth");
    for (std::size_t i = 0; i < h.net.layers.size(); ++i)
      if (h.net.layers[i].weight.rows() != heads.front().net.layers[i].weight.rows())
        throw ShapeError("heads differ in shape");
    if (!h.log_std.allFinite()) throw DomainError("head log_std is not finite");
  }
}

HeadParams make_head(const PolicyShape& shape, Rng& rng) {
  const int sizes[] = {shape.shared_hidden, shape.head_hidden, shape.action_dim};
  HeadParams h;
  h.net = nn::make_dense_net(sizes, nn::Activation::Relu, nn::Activation::Identity, rng);
  h.log_std = VectorXd::Constant(shape.action_dim, shape.init_log_std);
  return h;
}

MultiheadPolicy make_policy(const PolicyShape& shape, Rng& rng) {
  if (shape.obs_dim < 1 || shape.action_dim < 1 || shape.shared_hidden < 1 || shape.head_hidden < 1)
    throw ShapeError("policy dimensions must be positive");
  MultiheadPolicy p;
  p.shape = shape;
  const int sizes[] = {shape.obs_dim, shape.shared_hidden};
  p.shared = nn::make_dense_net(sizes, nn::Activation::Relu, nn::Activation::Relu, rng);
  p.heads.push_back(make_head(shape, rng));
  return p;
}

MatrixXd shared_features(const MultiheadPolicy& policy, const MatrixXd& obs, nn::ForwardCache* cache) {
  return nn::forward_batch(policy.shared, obs, cache);
}

MatrixXd head_means(const MultiheadPolicy& policy, int head, const MatrixXd& obs) {
  check_head(policy, head);
  return nn::forward_batch(policy.heads[static_cast<std::size_t>(head)].net, shared_features(policy, obs));
}

nn::GaussianActionDist act_dist(const MultiheadPolicy& policy, int head, const VectorXd& obs) {
  check_head(policy, head);
  const auto& h = policy.heads[static_cast<std::size_t>(head)];
  return {nn::forward(h.net, nn::forward(policy.shared, obs)), h.log_std.array().exp()};
}

int expansion_source(const MultiheadPolicy& policy, HeadInit strategy, const ContextRegistry& registry, Rng& rng) {
  if (registry.K() != policy.K() + 1)
    throw PreconditionError("expand needs exactly one more context than heads");
  if (strategy == HeadInit::Random) return -1;
  if (policy.K() == 0) throw PreconditionError("no trained head to copy");
  if (strategy == HeadInit::RandomTrained) return static_cast<int>(rng.index(static_cast<std::size_t>(policy.K())));
  const VectorXd& fresh = registry.mu.back();
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int k = 0; k < policy.K(); ++k) {
    const double d = (registry.mu[static_cast<std::size_t>(k)] - fresh).norm();
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

MultiheadPolicy expand(MultiheadPolicy policy, HeadInit strategy, const ContextRegistry& registry, Rng& rng) {
  const int src = expansion_source(policy, strategy, registry, rng);
  if (src < 0) {
    policy.heads.push_back(make_head(policy.shape, rng));
  } else {
    HeadParams copy = policy.heads[static_cast<std::size_t>(src)];
    policy.heads.push_back(std::move(copy));
  }
  return policy;
}

MultiheadPolicy snapshot(const MultiheadPolicy& policy) { return policy; }

PolicyGrad PolicyGrad::zeros_like(const MultiheadPolicy& policy) {
  PolicyGrad g;
  g.shared = nn::GradientBundle::zeros_like(policy.shared);
  for (const auto& h : policy.heads)
    g.heads.push_back({nn::GradientBundle::zeros_like(h.net), VectorXd::Zero(h.log_std.size())});
  return g;
}

PolicyGrad& PolicyGrad::operator+=(const PolicyGrad& other) {
  if (other.heads.size() != heads.size()) throw ShapeError("policy gradients differ in head count");
  shared += other.shared;
  for (std::size_t k = 0; k < heads.size(); ++k) {
    heads[k].net += other.heads[k].net;
    heads[k].log_std += other.heads[k].log_std;
  }
  return *this;
}

PolicyGrad& PolicyGrad::operator*=(double s) {
  shared *= s;
  for (auto& h : heads) {
    h.net *= s;
    h.log_std *= s;
  }
  return *this;
}

bool PolicyGrad::is_zero() const {
  if (!shared.is_zero()) return false;
  for (const auto& h : heads)
    if (!h.net.is_zero() || !h.log_std.isZero(0.0)) return false;
  return true;
}

std::vector<std::span<double>> tensors(MultiheadPolicy& policy) {
  return policy_tensors<std::span<double>>(policy);
}
std::vector<std::span<const double>> tensors(const MultiheadPolicy& policy) {
  return policy_tensors<std::span<const double>>(policy);
}
std::vector<std::span<double>> tensors(PolicyGrad& grad) { return grad_tensors<std::span<double>>(grad); }
std::vector<std::span<const double>> tensors(const PolicyGrad& grad) {
  return grad_tensors<std::span<const double>>(grad);
}

// Eigen stores column-major; flat vectors here follow storage order, which
// is also what the binary checkpoint writes after transposing to row-major.
VectorXd flatten(const MultiheadPolicy& policy) { return concat(tensors(policy)); }
VectorXd flatten(const PolicyGrad& grad) { return concat(tensors(grad)); }

void unflatten(const VectorXd& flat, MultiheadPolicy& policy) {
  auto spans = tensors(policy);
  std::size_t n = 0;
  for (const auto& s : spans) n += s.size();
  if (static_cast<std::size_t>(flat.size()) != n) throw ShapeError("flat policy vector has the wrong length");
  std::size_t k = 0;
  for (auto& s : spans) {
    std::copy(flat.data() + k, flat.data() + k + s.size(), s.begin());
    k += s.size();
  }
}

bool identical(const HeadParams& a, const HeadParams& b) {
  return same_bits(a.net, b.net) && a.log_std.size() == b.log_std.size() &&
         std::memcmp(a.log_std.data(), b.log_std.data(), sizeof(double) * static_cast<std::size_t>(a.log_std.size())) ==
             0;
}

bool identical(const MultiheadPolicy& a, const MultiheadPolicy& b) {
  if (a.heads.size() != b.heads.size() || !same_bits(a.shared, b.shared)) return false;
  for (std::size_t k = 0; k < a.heads.size(); ++k)
    if (!identical(a.heads[k], b.heads[k])) return false;
  return true;
}

}  // namespace crl
