#include <cmath>
#include <map>
#include <numbers>

#include "crlkit/context.hpp"
#include "crlkit/envs.hpp"
#include "crlkit/errors.hpp"
#include "doctest.h"

using namespace crl;

namespace {

VectorXd vec(std::initializer_list<double> v) {
  VectorXd x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) x[i++] = d;
  return x;
}

ContextRegistry registry_with(std::vector<VectorXd> mu, std::vector<int> counts, double alpha, double sigma2) {
  ContextRegistry r = make_registry(alpha, sigma2);
  r.mu = std::move(mu);
  r.counts = std::move(counts);
  for (int c : r.counts) r.t += c;
  return r;
}

ContextRegistry random_registry(Rng& rng, int d) {
  const int K = 1 + static_cast<int>(rng.index(6));
  std::vector<VectorXd> mu;
  std::vector<int> counts;
  for (int k = 0; k < K; ++k) {
    VectorXd m(d);
    for (int j = 0; j < d; ++j) m[j] = rng.uniform(0, 1);
    mu.push_back(m);
    counts.push_back(1 + static_cast<int>(rng.index(9)));
  }
  return registry_with(mu, counts, rng.uniform(0.01, 5), rng.uniform(0.005, 0.2));
}

}  // namespace

TEST_CASE("crp_prior examples") {
  auto r = registry_with({vec({0, 0})}, {1}, 1.0, 0.01);
  CHECK(crp_prior(r) == vec({0.5, 0.5}));
  r = registry_with({vec({0, 0}), vec({1, 1})}, {2, 1}, 1.0, 0.01);
  CHECK(crp_prior(r).isApprox(vec({0.5, 0.25, 0.25}), 1e-15));
  r = registry_with({vec({0, 0})}, {3}, 1e-12, 0.01);
  CHECK(crp_prior(r)[1] < 1e-12);
  CHECK_THROWS_AS(crp_prior(make_registry(1.0, 0.01)), PreconditionError);
  CHECK_THROWS_AS(make_registry(0.0, 0.01), DomainError);
  CHECK_THROWS_AS(make_registry(1.0, -1.0), DomainError);
}

TEST_CASE("likelihood closed forms") {
  auto r = registry_with({vec({0.2, 0.4})}, {1}, 1.0, 0.05);
  const double peak = 1.0 / (2 * std::numbers::pi * 0.05);
  CHECK(likelihood(r, vec({0.2, 0.4}), 0) == doctest::Approx(3.1831).epsilon(1e-4));
  CHECK(likelihood(r, vec({0.2, 0.4}), 0) == doctest::Approx(peak).epsilon(1e-14));
  // squared distance 2 sigma^2 = 0.1
  VectorXd x = vec({0.2 + std::sqrt(0.1), 0.4});
  CHECK(likelihood(r, x, 0) == doctest::Approx(peak * std::exp(-1.0)).epsilon(1e-12));
  CHECK(likelihood(r, x, 1) == doctest::Approx(peak).epsilon(1e-14));
  CHECK(likelihood(r, x, 1) > likelihood(r, x, 0));
  CHECK_THROWS_AS(likelihood(r, x, 2), InputError);
}

TEST_CASE("posterior examples") {
  auto r = registry_with({vec({0.3, 0.3})}, {1}, 1.0, 0.01);
  CHECK(posterior(r, vec({0.3, 0.3})).isApprox(vec({0.5, 0.5}), 1e-15));
  CHECK(posterior(r, vec({1.3, 0.3}))[1] > 0.99);
}

TEST_CASE("posterior matches a direct product oracle") {
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    auto r = random_registry(rng, 3);
    VectorXd x(3);
    for (int j = 0; j < 3; ++j) x[j] = rng.uniform(0, 1);
    // Direct evaluation in linear space; sigma2 is large enough here to avoid underflow.
    std::vector<double> w;
    for (int k = 0; k < r.K(); ++k) {
      const double d2 = (x - r.mu[static_cast<std::size_t>(k)]).squaredNorm();
      w.push_back(r.counts[static_cast<std::size_t>(k)] / (r.t + r.alpha) *
                  std::pow(2 * std::numbers::pi * r.sigma2, -1.5) * std::exp(-d2 / (2 * r.sigma2)));
    }
    w.push_back(r.alpha / (r.t + r.alpha) * std::pow(2 * std::numbers::pi * r.sigma2, -1.5));
    double z = 0.0;
    for (double v : w) z += v;
    VectorXd p = posterior(r, x);
    CHECK(std::abs(p.sum() - 1.0) < 1e-9);
    CHECK(std::abs(crp_prior(r).sum() - 1.0) < 1e-9);
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double want = w[k] / z;
      CHECK(std::abs(p[static_cast<Eigen::Index>(k)] - want) <= 1e-12 * std::max(want, 1e-300) + 1e-300);
    }
  }
}

TEST_CASE("posterior survives extreme distances") {
  auto r = registry_with({vec({0, 0})}, {5}, 0.5, 1e-6);
  VectorXd p = posterior(r, vec({1, 1}));
  CHECK(p.allFinite());
  CHECK(p[1] == doctest::Approx(1.0));
}

TEST_CASE("update_params examples") {
  auto r = registry_with({vec({0, 0}), vec({1, 1})}, {1, 2}, 1.0, 0.01);
  auto u = update_params(r, vec({0.5, 0.5}), vec({0.0, 1.0}));
  CHECK(u.mu[0] == r.mu[0]);
  CHECK(u.mu[1].isApprox(vec({1 - 0.5 / 3, 1 - 0.5 / 3}), 1e-15));
  CHECK(u.counts == r.counts);
  u = update_params(r, vec({1, 1}), vec({0.3, 0.7}));
  CHECK(u.mu[1] == r.mu[1]);

  auto one = registry_with({vec({0.2, 0.6})}, {1}, 1.0, 0.01);
  u = update_params(one, vec({0.4, 0.2}), vec({1.0}));
  CHECK(u.mu[0].isApprox(vec({0.3, 0.4}), 1e-15));

  one.update = CentroidUpdate::Literal;
  u = update_params(one, vec({0.21, 0.6}), vec({1.0}));
  CHECK(u.mu[0].isApprox(vec({0.2 + 0.5 * 0.01 / 0.01, 0.6}), 1e-12));
}

TEST_CASE("detect examples") {
  auto r = registry_with({vec({0.4, 0.4})}, {1}, 1.0, 0.01);
  auto [a, next] = detect(r, vec({0.4, 0.4}));
  CHECK_FALSE(a.is_new);
  CHECK(a.z_star == 0);
  CHECK(next.K() == 1);

  auto [b, next2] = detect(r, vec({0.4 + 1.0, 0.4}));  // 10 sigma away
  CHECK(b.is_new);
  CHECK(b.z_star == 1);
  CHECK(next2.K() == 2);
  CHECK(next2.mu[1] == vec({1.4, 0.4}));
  CHECK(std::abs(b.posterior.sum() - 1.0) < 1e-9);

  auto reg = register_assignment(next2, b);
  CHECK(reg.counts == std::vector<int>{1, 1});
  CHECK(reg.t == 2);
}

TEST_CASE("register bookkeeping") {
  auto r = seat_first(make_registry(1.0, 0.01), vec({0.1, 0.1}));
  CHECK(r.counts == std::vector<int>{1});
  CHECK(r.t == 1);
  CHECK_THROWS_AS(seat_first(r, vec({0.1, 0.1})), PreconditionError);
  auto [a, next] = detect(r, vec({0.1, 0.1}));
  auto reg = register_assignment(next, a);
  CHECK(reg.counts == std::vector<int>{2});
  CHECK(reg.t == 2);
  Assignment bad;
  bad.z_star = 5;
  CHECK_THROWS_AS(register_assignment(reg, bad), LogicError);

  Rng rng(12);
  ContextRegistry s = seat_first(make_registry(0.8, 0.02), vec({0.5, 0.5}));
  int last_k = 1;
  for (int i = 0; i < 200; ++i) {
    VectorXd x = vec({rng.uniform(0, 1), rng.uniform(0, 1)});
    auto [as, nx] = detect(s, x);
    s = register_assignment(nx, as);
    CHECK(s.K() >= last_k);
    last_k = s.K();
    s.check();
  }
  for (int c : s.counts) CHECK(c >= 1);
}

TEST_CASE("recurring feature never opens a second context") {
  for (double alpha : {0.1, 0.5, 0.99}) {
    VectorXd x = vec({0.05, 0.05, 0.71, 0.33});
    ContextRegistry r = seat_first(make_registry(alpha, 0.0025), x);
    for (int i = 0; i < 10; ++i) {
      auto [a, nx] = detect(r, x);
      CHECK_FALSE(a.is_new);
      r = register_assignment(nx, a);
    }
    CHECK(r.K() == 1);
  }
}

TEST_CASE("map ties go to the lowest index") {
  auto r = registry_with({vec({0, 0}), vec({1, 0}), vec({0, 0})}, {1, 1, 1}, 1.0, 0.01);
  CHECK(map_context(r, vec({0, 0})) == 0);
  CHECK(map_context(r, vec({0.5, 0})) == 0);
  CHECK(map_context(r, vec({0.9, 0})) == 1);
}

TEST_CASE("planted clusters are recovered on a separated stream") {
  // Well separated planted stream: tight spread relative to the likelihood scale.
  StreamOptions opt;
  opt.cluster_spread = 0.02;
  opt.min_separation_factor = 10.0;
  TaskStream s = generate_stream(StreamType::I, 2, opt);
  ContextRegistry r = seat_first(make_registry(0.3, 0.01), s.tasks[0].variation_params);
  std::vector<int> z{0};
  for (std::size_t i = 1; i < s.tasks.size(); ++i) {
    auto [a, nx] = detect(r, s.tasks[i].variation_params);
    r = register_assignment(nx, a);
    z.push_back(a.z_star);
  }
  CHECK(r.K() == 4);
  // Purity: every context is label-homogeneous.
  std::map<int, std::map<int, int>> table;
  for (std::size_t i = 0; i < z.size(); ++i) ++table[z[i]][s.tasks[i].true_cluster];
  int majority = 0;
  for (auto& [k, row] : table) {
    int best = 0;
    for (auto& [c, n] : row) best = std::max(best, n);
    majority += best;
  }
  CHECK(majority == 50);
}
