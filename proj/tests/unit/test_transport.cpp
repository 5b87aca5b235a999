#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "srf/error.hpp"
#include "srf/transport.hpp"

using namespace srf;

namespace {

ProbabilityVector random_measure(std::mt19937& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> w(n);
  for (auto& x : w) x = u(rng) + 0.05;
  return ProbabilityVector::normalized(w);
}

DiscreteGeodesicSpace random_space(std::mt19937& rng, std::size_t n, const TimeGrid& grid) {
  std::uniform_real_distribution<double> u(0.5, 2.0);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (j == i + 1 || u(rng) < 1.2) edges.push_back({i, j});
  std::vector<std::vector<double>> lengths(grid.size(), std::vector<double>(edges.size()));
  for (auto& row : lengths)
    for (auto& l : row) l = u(rng);
  return DiscreteGeodesicSpace(n, edges, grid, lengths);
}

// Minimum of sum c(x,y) q(x,y) over integer tables with margins a, b, divided by the common denominator.
// Vertices of the transport polytope are integral, so this is the LP optimum.
double enumerate_tables(const Eigen::MatrixXd& cost, std::vector<int> a, std::vector<int> b, int denom) {
  const std::size_t n = a.size();
  double best = INFINITY;
  std::function<void(std::size_t, std::size_t, double)> rec = [&](std::size_t i, std::size_t j, double acc) {
    if (acc >= best) return;
    if (i == n) {
      best = acc;
      return;
    }
    if (j == n - 1) {
      const int q = a[i];
      if (q > b[j]) return;
      b[j] -= q;
      a[i] = 0;
      rec(i + 1, 0, acc + q * cost(i, j));
      a[i] = q;
      b[j] += q;
      return;
    }
    for (int q = 0; q <= std::min(a[i], b[j]); ++q) {
      a[i] -= q;
      b[j] -= q;
      rec(i, j + 1, acc + q * cost(i, j));
      a[i] += q;
      b[j] += q;
    }
  };
  rec(0, 0, 0.0);
  return best / denom;
}

std::vector<int> random_composition(std::mt19937& rng, std::size_t n, int total) {
  std::vector<int> c(n, 0);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (int k = 0; k < total; ++k) ++c[pick(rng)];
  return c;
}

ProbabilityVector from_counts(const std::vector<int>& c, int denom) {
  std::vector<double> w(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) w[i] = static_cast<double>(c[i]) / denom;
  return ProbabilityVector(w);
}

}  // namespace

TEST_SUITE("transport") {
  TEST_CASE("probability vectors validate their weights") {
    CHECK_THROWS_AS(ProbabilityVector({0.5, 0.6}), InvalidInput);
    CHECK_THROWS_AS(ProbabilityVector({1.2, -0.2}), InvalidInput);
    CHECK_THROWS_AS(ProbabilityVector::normalized({0.0, 0.0}), InvalidInput);
    auto p = ProbabilityVector::normalized({1, 3});
    CHECK(p[1] == doctest::Approx(0.75));
    CHECK(ProbabilityVector::dirac(3, 2).support() == std::vector<std::size_t>{2});
  }

  TEST_CASE("identical measures are at distance zero with a diagonal coupling") {
    auto space = make_cycle(6, 6.0, TimeGrid({0.0}));
    std::mt19937 rng(3);
    auto mu = random_measure(rng, 6);
    auto r = wasserstein(space, 0, mu, mu);
    CHECK(r.distance == doctest::Approx(0.0).epsilon(1e-12));
    for (int i = 0; i < 6; ++i) CHECK(r.plan(i, i) == doctest::Approx(mu[i]).epsilon(1e-12));
  }

  TEST_CASE("point masses embed isometrically") {
    auto space = make_cycle(8, 8.0, TimeGrid({0.0}));
    for (std::size_t y = 0; y < 8; ++y) {
      auto r = wasserstein(space, 0, ProbabilityVector::dirac(8, 1), ProbabilityVector::dirac(8, y));
      CHECK(r.distance == doctest::Approx(space.distance(0, 1, y)).epsilon(1e-12));
    }
  }

  TEST_CASE("two-point space with the unique coupling") {
    auto space = make_path_graph(2, 1.0, TimeGrid({0.0}));
    auto r = wasserstein(space, 0, ProbabilityVector::dirac(2, 0), ProbabilityVector({0.5, 0.5}));
    CHECK(r.cost == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.distance == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
    CHECK(r.plan(0, 0) == doctest::Approx(0.5));
    CHECK(r.plan(0, 1) == doctest::Approx(0.5));
  }

  TEST_CASE("mismatched sizes are rejected") {
    auto space = make_path_graph(3, 1.0, TimeGrid({0.0}));
    CHECK_THROWS_AS(wasserstein(space, 0, ProbabilityVector::uniform(2), ProbabilityVector::uniform(3)),
                    InvalidInput);
  }

  TEST_CASE("couplings have the prescribed marginals") {
    std::mt19937 rng(11);
    auto space = random_space(rng, 7, TimeGrid({0.0}));
    for (int trial = 0; trial < 20; ++trial) {
      auto mu = random_measure(rng, 7), nu = random_measure(rng, 7);
      auto r = wasserstein(space, 0, mu, nu);
      CHECK(r.plan.minCoeff() >= -1e-14);
      for (int i = 0; i < 7; ++i) {
        CHECK(std::abs(r.plan.row(i).sum() - mu[i]) <= 1e-10);
        CHECK(std::abs(r.plan.col(i).sum() - nu[i]) <= 1e-10);
      }
      double c = 0;
      for (int i = 0; i < 7; ++i)
        for (int j = 0; j < 7; ++j) c += r.plan(i, j) * std::pow(space.distance(0, i, j), 2);
      CHECK(c == doctest::Approx(r.cost).epsilon(1e-12));
    }
  }

  TEST_CASE("interpolation endpoints are exact") {
    std::mt19937 rng(5);
    auto space = make_cycle(10, 10.0, TimeGrid({0.0}));
    auto mu = random_measure(rng, 10), nu = random_measure(rng, 10);
    auto r = wasserstein(space, 0, mu, nu);
    auto path = displacement_interpolation(space, 0, mu, nu, r.plan, {0.0, 0.5, 1.0});
    CHECK(path.measures.front().values() == mu.values());
    CHECK(path.measures.back().values() == nu.values());
    CHECK_THROWS_AS(displacement_interpolation(space, 0, mu, nu, r.plan, {1.5}), InvalidInput);
  }

  TEST_CASE("rotation on a circle moves a point mass to the path midpoint") {
    auto space = make_cycle(12, 12.0, TimeGrid({0.0}));
    auto mu = ProbabilityVector::dirac(12, 2), nu = ProbabilityVector::dirac(12, 6);
    auto r = wasserstein(space, 0, mu, nu);
    auto path = displacement_interpolation(space, 0, mu, nu, r.plan, {0.5});
    CHECK(path.measures[0][4] == doctest::Approx(1.0));
  }

  TEST_CASE("midpoint property holds up to the mesh") {
    const std::size_t n = 40;
    const double h = 1.0 / n;
    auto space = make_cycle(n, 1.0, TimeGrid({0.0}));
    std::mt19937 rng(8);
    for (int trial = 0; trial < 5; ++trial) {
      auto mu = random_measure(rng, n), nu = random_measure(rng, n);
      auto r = wasserstein(space, 0, mu, nu);
      auto path = displacement_interpolation(space, 0, mu, nu, r.plan, {0.5});
      const double a = wasserstein(space, 0, mu, path.measures[0]).distance;
      const double b = wasserstein(space, 0, path.measures[0], nu).distance;
      CHECK(std::abs(a - 0.5 * r.distance) <= h);
      CHECK(std::abs(b - 0.5 * r.distance) <= h);
    }
  }

  TEST_CASE("entropy of a dirac against the uniform measure") {
    std::vector<double> m(4, 0.25), f(4, 0.0);
    CHECK(entropy(m, f, ProbabilityVector::dirac(4, 1)) == doctest::Approx(std::log(4.0)).epsilon(1e-14));
  }

  TEST_CASE("entropy of the normalized weighted reference") {
    std::vector<double> m{0.3, 0.9, 0.5};
    const double c = 0.7;
    std::vector<double> f(3, c), mt(3);
    double total = 0;
    for (int i = 0; i < 3; ++i) total += (mt[i] = std::exp(-c) * m[i]);
    auto mu = ProbabilityVector::normalized(mt);
    CHECK(entropy(m, f, mu) == doctest::Approx(-std::log(total)).epsilon(1e-12));
  }

  TEST_CASE("entropy matches the density form") {
    std::vector<double> m{0.5, 0.5}, f{0.0, 1.0};
    auto mu = ProbabilityVector::uniform(2);
    // rho = mu / m_t, with m_t = e^{-f} m.
    double direct = 0;
    for (int x = 0; x < 2; ++x) {
      const double mt = std::exp(-f[x]) * m[x], rho = mu[x] / mt;
      direct += rho * std::log(rho) * mt;
    }
    CHECK(std::abs(entropy(m, f, mu) - direct) <= 1e-10);
    CHECK(entropy(m, f, mu) == doctest::Approx(0.5).epsilon(1e-12));
  }

  TEST_CASE("entropy is infinite on null vertices") {
    std::vector<double> m{0.5, 0.0, 0.5}, f(3, 0.0);
    CHECK(std::isinf(entropy(m, f, ProbabilityVector::uniform(3))));
    CHECK(std::isfinite(entropy(m, f, ProbabilityVector({0.5, 0.0, 0.5}))));
  }

  TEST_CASE("constant measure path has no action or strain") {
    auto space = make_cycle(8, 8.0, TimeGrid({0.0, 1.0}));
    MeasurePath p;
    p.time = 1;
    p.tau = uniform_taus(4);
    p.measures.assign(5, ProbabilityVector::uniform(8));
    auto fn = measure_path_functionals(space, 1, p);
    CHECK(fn.action == doctest::Approx(0.0));
    CHECK(fn.strain == doctest::Approx(0.0));
  }

  TEST_CASE("geodesic action and the scaling identity for strain") {
    const double kappa = 0.4;
    auto grid = TimeGrid({0.0, 0.01});
    auto space = make_cycle(24, 1.0, grid, [&](double t) { return std::exp(kappa * t); });
    auto mu = ProbabilityVector::dirac(24, 0), nu = ProbabilityVector({0, 0, 0, 0, 0, 0.5, 0.5, 0, 0, 0, 0, 0,
                                                                       0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0});
    auto r = wasserstein(space, 1, mu, nu);
    auto path = displacement_interpolation(space, 1, mu, nu, r.plan, uniform_taus(6));
    auto fn = measure_path_functionals(space, 1, path);
    CHECK(fn.action == doctest::Approx(r.cost).epsilon(0.05));
    // W_t^2 scales with e^{2 kappa t}, so the backward difference quotient is (1 - e^{-2 kappa dt})/dt.
    // The infimum over sub-partitions is attained by the coarsest one.
    const double factor = (1 - std::exp(-2 * kappa * 0.01)) / 0.01;
    CHECK(fn.strain == doctest::Approx(factor * r.cost).epsilon(1e-9));
    CHECK(fn.strain == doctest::Approx(2 * kappa * fn.action).epsilon(0.06));
  }

  TEST_CASE("strain needs a previous grid time") {
    auto space = make_cycle(4, 4.0, TimeGrid({0.0, 1.0}));
    MeasurePath p;
    p.time = 0;
    p.tau = {0.0, 1.0};
    p.measures.assign(2, ProbabilityVector::uniform(4));
    CHECK_THROWS_AS(measure_path_functionals(space, 0, p), InvalidInput);
  }

  TEST_CASE("property: symmetry and triangle inequality") {
    std::mt19937 rng(21);
    auto space = random_space(rng, 6, TimeGrid({0.0}));
    for (int trial = 0; trial < 40; ++trial) {
      auto a = random_measure(rng, 6), b = random_measure(rng, 6), c = random_measure(rng, 6);
      const double ab = wasserstein(space, 0, a, b).distance, ba = wasserstein(space, 0, b, a).distance;
      const double bc = wasserstein(space, 0, b, c).distance, ac = wasserstein(space, 0, a, c).distance;
      CHECK(std::abs(ab - ba) <= 1e-9);
      CHECK(ac <= ab + bc + 1e-9);
    }
  }

  TEST_CASE("property: pointwise bounds pass to the Wasserstein distance") {
    std::mt19937 rng(22);
    auto space = random_space(rng, 6, TimeGrid({0.0, 1.0}));
    // Two admissible constant pairs: (max excess, 1) and (0, max ratio).
    double excess = 0, ratio = 0;
    for (int x = 0; x < 6; ++x)
      for (int y = x + 1; y < 6; ++y) {
        const double a = std::pow(space.distance(1, x, y), 2), b = std::pow(space.distance(0, x, y), 2);
        excess = std::max(excess, a - b);
        ratio = std::max(ratio, a / b);
      }
    for (int trial = 0; trial < 40; ++trial) {
      auto mu = random_measure(rng, 6), nu = random_measure(rng, 6);
      const double wt = wasserstein(space, 1, mu, nu).cost, ws = wasserstein(space, 0, mu, nu).cost;
      CHECK(wt <= excess + ws + 1e-9);
      CHECK(wt <= ratio * ws + 1e-9);
    }
  }

  TEST_CASE("property: log-Lipschitz rates carry over to measures") {
    std::mt19937 rng(23);
    auto space = random_space(rng, 5, TimeGrid::uniform(0.0, 1.0, 4));
    auto c = estimate_controls(space);
    for (int trial = 0; trial < 20; ++trial) {
      auto mu = random_measure(rng, 5), nu = random_measure(rng, 5);
      for (std::size_t k = 1; k < space.grid().size(); ++k) {
        const double dt = space.grid()[k] - space.grid()[k - 1];
        const double d = std::log(wasserstein(space, k, mu, nu).distance) -
                         std::log(wasserstein(space, k - 1, mu, nu).distance);
        CHECK(d <= c.kappa[k] * dt + 1e-9);
        CHECK(d >= -c.lambda[k] * dt - 1e-9);
      }
    }
  }

  TEST_CASE("property: optimum matches exhaustive enumeration of integer couplings") {
    std::mt19937 rng(24);
    for (int trial = 0; trial < 60; ++trial) {
      const std::size_t n = 2 + trial % 3;
      const int denom = 2 + trial % 5;
      auto space = random_space(rng, n, TimeGrid({0.0}));
      auto a = random_composition(rng, n, denom), b = random_composition(rng, n, denom);
      Eigen::MatrixXd cost = space.distances(0).array().square();
      const double oracle = enumerate_tables(cost, a, b, denom);
      auto r = wasserstein(space, 0, from_counts(a, denom), from_counts(b, denom));
      CAPTURE(trial);
      CHECK(std::abs(r.cost - oracle) <= 1e-9);
    }
  }
}
