#include <cmath>

#include "crlkit/errors.hpp"
#include "crlkit/policy.hpp"
#include "doctest.h"

using namespace crl;

namespace {

PolicyShape small_shape() {
  PolicyShape s;
  s.obs_dim = 4;
  s.shared_hidden = 7;
  s.head_hidden = 5;
  return s;
}

VectorXd obs4(double a, double b, double c, double d) {
  VectorXd v(4);
  v << a, b, c, d;
  return v;
}

// Plain loops over the stored matrices, independent of forward().
VectorXd loop_forward(const nn::DenseNet& net, VectorXd x) {
  for (const auto& layer : net.layers) {
    VectorXd y(layer.weight.rows());
    for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) {
      double s = layer.bias[i];
      for (Eigen::Index j = 0; j < layer.weight.cols(); ++j) s += layer.weight(i, j) * x[j];
      y[i] = layer.activation == nn::Activation::Relu ? (s > 0 ? s : 0.0) : s;
    }
    x = y;
  }
  return x;
}

ContextRegistry registry_of(std::vector<VectorXd> mu) {
  ContextRegistry r = make_registry(1.0, 0.01);
  r.mu = std::move(mu);
  r.counts.assign(r.mu.size(), 1);
  r.counts.back() = 0;
  r.t = static_cast<int>(r.mu.size()) - 1;
  return r;
}

VectorXd v2(double a, double b) {
  VectorXd v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_CASE("act_dist on zeroed weights") {
  Rng rng(1);
  auto p = make_policy(small_shape(), rng);
  for (auto& l : p.shared.layers) l.weight.setZero(), l.bias.setZero();
  for (auto& h : p.heads) {
    for (auto& l : h.net.layers) l.weight.setZero(), l.bias.setZero();
    h.log_std.setConstant(std::log(0.5));
  }
  const auto d = act_dist(p, 0, obs4(0.3, -2, 7, 1));
  CHECK(d.mean.isZero(0.0));
  CHECK(d.stddev[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(d.stddev[1] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("act_dist matches a loop oracle and validates the head") {
  Rng rng(2);
  auto p = make_policy(small_shape(), rng);
  for (int i = 0; i < 20; ++i) {
    const VectorXd o = obs4(rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(0, 1));
    const VectorXd ref = loop_forward(p.heads[0].net, loop_forward(p.shared, o));
    CHECK((act_dist(p, 0, o).mean - ref).cwiseAbs().maxCoeff() < 1e-12);
  }
  CHECK(act_dist(p, 0, obs4(0, 0, 0, 0)).stddev.isApprox(VectorXd::Constant(2, 0.1), 1e-14));
  CHECK_THROWS_AS(act_dist(p, 1, obs4(0, 0, 0, 0)), IndexError);
  CHECK_THROWS_AS(act_dist(p, -1, obs4(0, 0, 0, 0)), IndexError);
}

TEST_CASE("identical heads give identical distributions") {
  Rng rng(3);
  auto p = make_policy(small_shape(), rng);
  p.heads.push_back(p.heads[0]);
  const VectorXd o = obs4(0.1, 0.9, 0.4, 0.4);
  CHECK(act_dist(p, 0, o).mean == act_dist(p, 1, o).mean);
  CHECK(act_dist(p, 0, o).stddev == act_dist(p, 1, o).stddev);
}

TEST_CASE("expansion sources") {
  Rng rng(4);
  auto p = make_policy(small_shape(), rng);
  // K = 1: both trained strategies pick the only head.
  auto reg = registry_of({v2(0, 0), v2(0.7, 0.7)});
  CHECK(expansion_source(p, HeadInit::RandomTrained, reg, rng) == 0);
  CHECK(expansion_source(p, HeadInit::NearestTrained, reg, rng) == 0);
  CHECK(expansion_source(p, HeadInit::Random, reg, rng) == -1);

  p = expand(p, HeadInit::Random, reg, rng);
  reg = registry_of({v2(0, 0), v2(1, 1), v2(0.1, 0)});
  CHECK(expansion_source(p, HeadInit::NearestTrained, reg, rng) == 0);
  reg = registry_of({v2(0, 0), v2(1, 1), v2(0.9, 0.8)});
  CHECK(expansion_source(p, HeadInit::NearestTrained, reg, rng) == 1);

  CHECK_THROWS_AS(expansion_source(p, HeadInit::NearestTrained, registry_of({v2(0, 0), v2(1, 1)}), rng),
                  PreconditionError);
}

TEST_CASE("random_trained picks every head eventually") {
  Rng rng(5);
  auto p = make_policy(small_shape(), rng);
  p.heads.push_back(make_head(p.shape, rng));
  p.heads.push_back(make_head(p.shape, rng));
  const auto reg = registry_of({v2(0, 0), v2(1, 1), v2(0, 1), v2(0.5, 0.5)});
  std::vector<int> hits(3, 0);
  for (int i = 0; i < 300; ++i) ++hits[static_cast<std::size_t>(expansion_source(p, HeadInit::RandomTrained, reg, rng))];
  for (int h : hits) CHECK(h > 60);
}

TEST_CASE("expand copies bitwise and leaves old parameters untouched") {
  Rng rng(6);
  const std::vector<VectorXd> probes = {obs4(0.1, 0.2, 0.3, 0.4), obs4(0.9, 0.1, 0.5, 0.5), obs4(0, 1, 1, 0)};
  for (HeadInit s : {HeadInit::Random, HeadInit::RandomTrained, HeadInit::NearestTrained}) {
    auto p = make_policy(small_shape(), rng);
    p.heads[0].log_std.setConstant(-1.3);
    const auto before = snapshot(p);
    std::vector<VectorXd> outs;
    for (const auto& o : probes) outs.push_back(act_dist(p, 0, o).mean);
    const auto grown = expand(p, s, registry_of({v2(0, 0), v2(0.5, 0.5)}), rng);
    REQUIRE(grown.K() == 2);
    CHECK(identical(grown.heads[0], before.heads[0]));
    for (std::size_t i = 0; i < probes.size(); ++i) CHECK(act_dist(grown, 0, probes[i]).mean == outs[i]);
    if (s == HeadInit::Random) {
      CHECK_FALSE(identical(grown.heads[1], before.heads[0]));
      CHECK(grown.heads[1].log_std.isApprox(VectorXd::Constant(2, p.shape.init_log_std)));
    } else {
      CHECK(identical(grown.heads[1], before.heads[0]));
    }
    auto trimmed = grown;
    trimmed.heads.pop_back();
    CHECK(identical(trimmed, before));
  }
}

TEST_CASE("nearest head is invariant to uniform centroid scaling") {
  Rng rng(7);
  auto p = make_policy(small_shape(), rng);
  for (int k = 0; k < 4; ++k) p.heads.push_back(make_head(p.shape, rng));
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<VectorXd> mu;
    for (int k = 0; k < 6; ++k) mu.push_back(v2(rng.uniform(0, 1), rng.uniform(0, 1)));
    const double c = std::exp(rng.uniform(-4, 4));
    std::vector<VectorXd> scaled;
    for (const auto& m : mu) scaled.push_back(c * m);
    CHECK(expansion_source(p, HeadInit::NearestTrained, registry_of(mu), rng) ==
          expansion_source(p, HeadInit::NearestTrained, registry_of(scaled), rng));
  }
}

TEST_CASE("snapshot is a deep copy") {
  Rng rng(8);
  auto p = make_policy(small_shape(), rng);
  const auto teacher = snapshot(p);
  CHECK(identical(snapshot(teacher), teacher));
  const VectorXd o = obs4(0.2, 0.3, 0.1, 0.9);
  const auto d0 = act_dist(teacher, 0, o);
  CHECK(nn::kl_diag_gaussian(act_dist(p, 0, o), d0) == 0.0);
  p.shared.layers[0].weight.array() += 0.05;
  p.heads[0].log_std.array() += 0.1;
  const auto d1 = act_dist(teacher, 0, o);
  CHECK(d1.mean == d0.mean);
  CHECK(d1.stddev == d0.stddev);
  CHECK(nn::kl_diag_gaussian(act_dist(p, 0, o), d0) > 0.0);
}

TEST_CASE("flat views and gradient containers") {
  Rng rng(9);
  auto p = make_policy(small_shape(), rng);
  p.heads.push_back(make_head(p.shape, rng));
  const VectorXd flat = flatten(p);
  std::size_t n = 0;
  for (const auto& t : tensors(std::as_const(p))) n += t.size();
  CHECK(static_cast<std::size_t>(flat.size()) == n);
  auto q = make_policy(small_shape(), rng);
  q.heads.push_back(make_head(q.shape, rng));
  unflatten(flat, q);
  CHECK(identical(p, q));
  CHECK_THROWS(unflatten(VectorXd::Zero(3), q));

  auto g = PolicyGrad::zeros_like(p);
  CHECK(g.is_zero());
  CHECK(flatten(g).size() == flat.size());
  g.heads[1].log_std[0] = 2.0;
  auto h = g;
  h += g;
  h *= 0.25;
  CHECK(h.heads[1].log_std[0] == 1.0);
  CHECK_FALSE(h.is_zero());
}

TEST_CASE("head_init names round trip") {
  for (HeadInit h : {HeadInit::Random, HeadInit::RandomTrained, HeadInit::NearestTrained})
    CHECK(parse_head_init(to_string(h)) == h);
  CHECK_THROWS(parse_head_init("closest"));
}
