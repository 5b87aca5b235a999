#include <doctest.h>

#include <cmath>
#include <random>

#include "srf/convexity1d.hpp"
#include "srf/error.hpp"

using namespace srf;

namespace {

SampledFunction1D sample(std::size_t n, double (*u)(double)) {
  std::vector<double> t(n), v(n);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = static_cast<double>(i) / static_cast<double>(n - 1);
    v[i] = u(t[i]);
  }
  return {t, v};
}

double square(double t) { return t * t; }
double neg_square(double t) { return -t * t; }

}  // namespace

TEST_SUITE("convexity1d") {
  TEST_CASE("quadratic is 2-convex with zero slack") {
    auto v = is_k_convex(sample(11, square), 2.0, 1e-12);
    CHECK(v.holds);
    CHECK(std::abs(v.min_slack) <= 1e-12);
  }

  TEST_CASE("quadratic is not 2.5-convex; worst triple is the widest") {
    auto v = is_k_convex(sample(11, square), 2.5, 1e-12);
    CHECK_FALSE(v.holds);
    // slack = -0.25 (c-b)(b-a), smallest for a = 0, b = 1/2, c = 1
    CHECK(v.min_slack == doctest::Approx(-1.0 / 16.0).epsilon(1e-12));
    CHECK(v.witness[0] == 0);
    CHECK(v.witness[1] == 5);
    CHECK(v.witness[2] == 10);
  }

  TEST_CASE("negative quadratic is exactly -2-convex") {
    auto v = is_k_convex(sample(11, neg_square), -2.0, 1e-12);
    CHECK(v.holds);
    CHECK(std::abs(v.min_slack) < 1e-12);
  }

  TEST_CASE("short grids are rejected") {
    CHECK_THROWS_WITH_AS(is_k_convex(SampledFunction1D({0, 1}, {0, 1}), 0, 0), doctest::Contains("insufficient grid"),
                         InvalidInput);
    CHECK_THROWS_AS(is_kn_convex(SampledFunction1D({0, 0.5, 1}, {0, 1, 2}), 0, 1, 0), InvalidInput);
    CHECK_THROWS_AS(is_kn_convex(sample(5, square), 0, 0.0, 0), InvalidInput);
  }

  TEST_CASE("infinite values follow the +inf - +inf = +inf convention") {
    SampledFunction1D u({0, 0.5, 1}, {kInfinity, 0, kInfinity});
    CHECK(is_k_convex(u, 0, 0).holds);
    SampledFunction1D w({0, 0.5, 1}, {0, kInfinity, 0});
    CHECK_FALSE(is_k_convex(w, 0, 0).holds);
  }

  TEST_CASE("KN-convexity of the quadratic") {
    auto u = sample(101, square);
    CHECK(is_kn_convex(u, 0, INFINITY, 1e-9).holds);
    auto v = is_kn_convex(u, 0, 1.0, 1e-9);
    CHECK_FALSE(v.holds);
    // 2 - 4 tau^2 < 0 exactly for tau > 1/sqrt(2)
    CHECK(u.tau[v.witness[1]] > 1 / std::sqrt(2.0));
    // Restricted to tau <= 0.7 the condition holds.
    std::vector<double> t(u.tau.begin(), u.tau.begin() + 71), w(u.value.begin(), u.value.begin() + 71);
    CHECK(is_kn_convex({t, w}, 0, 1.0, 1e-9).holds);
  }

  TEST_CASE("constant functions are KN-convex for any N") {
    SampledFunction1D u({0, 0.2, 0.5, 0.9, 1}, {3, 3, 3, 3, 3});
    for (double N : {0.1, 1.0, 7.0, double(INFINITY)}) {
      auto v = is_kn_convex(u, 0, N, 1e-12);
      CHECK(v.holds);
      CHECK(std::abs(v.min_slack) < 1e-9);
    }
  }

  TEST_CASE("special functions") {
    CHECK(green_chi(0.25, 0.5) == doctest::Approx(0.125));
    CHECK(lambda_weight(0.25, 0.5) == doctest::Approx(1.0));
    CHECK(phi_N(2, 4) == doctest::Approx(3.0));
    CHECK(phi_N(-1.5, INFINITY) == -1.5);
    CHECK_THROWS_AS(green_chi(1.1, 0.5), InvalidInput);
    CHECK_THROWS_AS(lambda_weight(0.6, 0.5), InvalidInput);
    CHECK_THROWS_AS(lambda_weight(0.0, 0.5), InvalidInput);
    CHECK_THROWS_AS(phi_N(1, 0), InvalidInput);
  }

  TEST_CASE("lambda weight equals one on the middle band") {
    for (double tau : {0.1, 0.25, 0.4, 0.5})
      for (int j = 0; j <= 20; ++j) {
        const double s = j / 20.0;
        if (s >= tau && s <= 1 - tau) CHECK(lambda_weight(tau, s) == doctest::Approx(1.0));
      }
  }

  TEST_CASE("chi symmetries") {
    for (int i = 0; i <= 10; ++i)
      for (int j = 0; j <= 10; ++j) {
        const double t = i / 10.0, s = j / 10.0;
        CHECK(green_chi(t, s) == doctest::Approx(green_chi(s, t)));
        CHECK(green_chi(t, s) == doctest::Approx(green_chi(1 - t, 1 - s)));
      }
  }

  TEST_CASE("phi_N is nondecreasing above -N/2") {
    for (double N : {0.5, 1.0, 3.0, 10.0}) {
      double prev = phi_N(-N / 2, N);
      for (int k = 1; k <= 200; ++k) {
        const double u = -N / 2 + k * (N / 40.0);
        const double cur = phi_N(u, N);
        CHECK(cur >= prev - 1e-15);
        prev = cur;
      }
    }
  }

  TEST_CASE("coarsening never lowers the minimal slack") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-1, 1);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> t(9), v(9);
      for (int i = 0; i < 9; ++i) {
        t[i] = i / 8.0;
        v[i] = U(rng);
      }
      std::vector<double> tc, vc;
      for (int i = 0; i < 9; i += 2) {
        tc.push_back(t[i]);
        vc.push_back(v[i]);
      }
      const double K = U(rng);
      CHECK(is_k_convex({tc, vc}, K, 0).min_slack >= is_k_convex({t, v}, K, 0).min_slack);
    }
  }

  TEST_CASE("N = inf pointwise test agrees with the triple test on smooth samples") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-2, 2);
    for (int trial = 0; trial < 30; ++trial) {
      const double a = U(rng), b = U(rng), c = U(rng), K = U(rng) * 2;
      std::vector<double> t(41), v(41);
      for (int i = 0; i <= 40; ++i) {
        t[i] = i / 40.0;
        v[i] = a * t[i] * t[i] + b * std::sin(c * t[i]);
      }
      SampledFunction1D u(t, v);
      // On a uniform grid second differences of u - K t^2/2 are exact, so discrete convexity and
      // the triple test agree; near-zero cases are skipped to stay clear of rounding.
      auto tri = is_k_convex(u, K, 1e-12);
      auto pt = is_kn_convex(u, K, INFINITY, 0.0);
      CAPTURE(trial);
      if (std::abs(pt.min_slack) > 0.2) CHECK(tri.holds == pt.holds);
    }
  }
}
