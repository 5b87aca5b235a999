#include <doctest.h>

#include <cmath>

#include "srf/dynconv.hpp"
#include "srf/error.hpp"
#include "srf/riemann.hpp"

using namespace srf;

namespace {

Box box(std::initializer_list<double> lo, std::initializer_list<double> hi) {
  Box b;
  b.lo = Eigen::Map<const Vec>(lo.begin(), static_cast<Eigen::Index>(lo.size()));
  b.hi = Eigen::Map<const Vec>(hi.begin(), static_cast<Eigen::Index>(hi.size()));
  return b;
}

Vec point(std::initializer_list<double> v) { return Eigen::Map<const Vec>(v.begin(), static_cast<Eigen::Index>(v.size())); }

Box sphere_chart() { return box({0.6, -1.0}, {2.4, 1.0}); }
Box hyperbolic_chart() { return box({-1.0, 0.5}, {1.0, 2.0}); }

// Same metric as a model family but with no closed forms registered.
RiemannianFamily strip_closed_forms(const RiemannianFamily& fam) {
  return RiemannianFamily(fam.dim(), fam.chart(), [fam](double t, const Vec& x) { return fam.metric(t, x); });
}

double sq_half(double, const Vec& x) { return 0.5 * x.squaredNorm(); }

}  // namespace

TEST_SUITE("riemann") {
  TEST_CASE("construction rejects bad charts and dimensions") {
    auto id = [](double, const Vec&) { return Mat(Mat::Identity(2, 2)); };
    CHECK_THROWS_AS(RiemannianFamily(4, box({0, 0, 0, 0}, {1, 1, 1, 1}), id), InvalidInput);
    CHECK_THROWS_AS(RiemannianFamily(2, box({0, 0}, {1}), id), InvalidInput);
    CHECK_THROWS_AS(RiemannianFamily(2, box({1, 0}, {0, 1}), id), InvalidInput);
    CHECK_THROWS_AS(RiemannianFamily::shrinking_sphere(box({0.0, 0.0}, {1.0, 1.0})), InvalidInput);
    CHECK_THROWS_AS(RiemannianFamily::expanding_hyperbolic(box({0.0, -1.0}, {1.0, 1.0})), InvalidInput);
  }

  TEST_CASE("flat plane has no curvature") {
    auto fam = strip_closed_forms(RiemannianFamily::flat(2, box({-1, -1}, {1, 1})));
    auto ops = curvature_ops(fam, 0.0, point({0.2, -0.3}));
    CHECK_FALSE(ops.closed_form);
    CHECK(ops.ricci.cwiseAbs().maxCoeff() < 1e-10);
    for (const auto& g : ops.christoffel) CHECK(g.cwiseAbs().maxCoeff() < 1e-10);
  }

  TEST_CASE("stencils must stay inside the chart") {
    auto fam = RiemannianFamily::flat(1, box({-1}, {1}));
    CHECK_THROWS_AS(curvature_ops(fam, 0.0, point({0.999})), InvalidInput);
    CHECK_NOTHROW(curvature_ops(fam, 0.0, point({0.99})));
  }

  TEST_CASE("finite-difference curvature matches the closed forms") {
    for (auto fam : {RiemannianFamily::shrinking_sphere(sphere_chart()),
                     RiemannianFamily::expanding_hyperbolic(hyperbolic_chart())}) {
      auto bare = strip_closed_forms(fam);
      for (const auto& s : interior_samples(fam, {0.0, 0.2}, 4, 0.1)) {
        auto exact = curvature_ops(fam, s.t, s.x);
        auto fd = curvature_ops(bare, s.t, s.x);
        REQUIRE(exact.closed_form);
        CHECK((exact.ricci - fd.ricci).cwiseAbs().maxCoeff() <= 1e-6);
        for (std::size_t k = 0; k < 2; ++k)
          CHECK((exact.christoffel[k] - fd.christoffel[k]).cwiseAbs().maxCoeff() <= 1e-6);
        CHECK((exact.metric_rate - fd.metric_rate).cwiseAbs().maxCoeff() <= 1e-6);
      }
    }
  }

  TEST_CASE("Einstein constants of the unit sphere and the hyperbolic plane") {
    auto sphere = strip_closed_forms(RiemannianFamily::shrinking_sphere(sphere_chart()));
    auto hyper = strip_closed_forms(RiemannianFamily::expanding_hyperbolic(hyperbolic_chart()));
    for (const auto& s : interior_samples(sphere, {0.0}, 3, 0.1)) {
      auto ops = curvature_ops(sphere, 0.0, s.x);
      CHECK((ops.ricci - ops.metric).cwiseAbs().maxCoeff() <= 1e-6);
    }
    for (const auto& s : interior_samples(hyper, {0.0}, 3, 0.1)) {
      auto ops = curvature_ops(hyper, 0.0, s.x);
      CHECK((ops.ricci + ops.metric).cwiseAbs().maxCoeff() <= 1e-6);
    }
  }

  TEST_CASE("property: Ricci is invariant under constant rescaling") {
    auto fam = RiemannianFamily::shrinking_sphere(sphere_chart());
    auto bare = strip_closed_forms(fam);
    const Vec x = point({1.1, 0.3});
    auto a = curvature_ops(bare, 0.0, x), b = curvature_ops(bare, 0.3, x);
    CHECK((a.ricci - b.ricci).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK(b.metric(0, 0) == doctest::Approx(0.4));
  }

  TEST_CASE("Gaussian weight on the static plane") {
    auto fam = RiemannianFamily::flat(2, box({-1, -1}, {1, 1}), sq_half);
    auto samples = interior_samples(fam, {0.0}, 5);
    auto v = check_srf_tensor(fam, samples, 1e-6);
    CHECK(v.holds);
    CHECK(v.min_eigenvalue == doctest::Approx(1.0).epsilon(1e-6));
    auto sub = check_sub_rf_tensor(fam, samples, 1e-6);
    CHECK_FALSE(sub.holds);
    CHECK(sub.max_eigenvalue == doctest::Approx(1.0).epsilon(1e-6));
  }

  TEST_CASE("sphere and hyperbolic Ricci flows are equality cases") {
    for (auto fam : {RiemannianFamily::shrinking_sphere(sphere_chart()),
                     RiemannianFamily::expanding_hyperbolic(hyperbolic_chart())}) {
      auto samples = interior_samples(fam, {0.0, 0.1, 0.2, 0.3}, 5);
      auto super = check_srf_tensor(fam, samples, 1e-5);
      auto sub = check_sub_rf_tensor(fam, samples, 1e-5);
      CHECK(super.holds);
      CHECK(sub.holds);
      CHECK(std::abs(super.min_eigenvalue) <= 1e-5);
      CHECK(std::abs(sub.max_eigenvalue) <= 1e-5);
      auto bare = check_srf_tensor(strip_closed_forms(fam), samples, 1e-5);
      CHECK(std::abs(bare.min_eigenvalue) <= 1e-5);
    }
  }

  TEST_CASE("generalized eigenvalues are taken relative to the metric") {
    // g = 4 I with Ric = 0 and dg/dt = 8 I: the form is 4 I, i.e. eigenvalue 1 relative to g.
    auto fam = RiemannianFamily::model(
        ModelMetric::Flat, 2, box({-1, -1}, {1, 1}), [](double t) { return 4.0 + 8.0 * t; },
        [](double) { return 8.0; });
    auto v = check_srf_tensor(fam, {{0.0, point({0.0, 0.0})}}, 1e-9);
    CHECK(v.min_eigenvalue == doctest::Approx(1.0));
  }

  TEST_CASE("N-threshold on a weighted line") {
    auto fam = RiemannianFamily::flat(1, box({-2}, {2}), sq_half);
    auto inside = check_N_srf_tensor(fam, 2.0, {{0.0, point({1 - 1e-3})}, {0.0, point({-(1 - 1e-3)})}}, 1e-9);
    CHECK(inside.holds);
    CHECK(inside.min_eigenvalue == doctest::Approx(1 - std::pow(1 - 1e-3, 2)).epsilon(1e-6));
    auto outside = check_N_srf_tensor(fam, 2.0, {{0.0, point({1 + 1e-3})}}, 1e-9);
    CHECK_FALSE(outside.holds);
    CHECK_THROWS_AS(check_N_srf_tensor(fam, 0.5, {{0.0, point({0.0})}}, 1e-9), InvalidInput);
  }

  TEST_CASE("N equal to the dimension needs a constant weight") {
    auto fam = RiemannianFamily::flat(1, box({-2}, {2}), sq_half);
    auto v = check_N_srf_tensor(fam, 1.0, {{0.0, point({0.5})}}, 1e-9);
    CHECK_FALSE(v.holds);
    CHECK(v.note == "weight not constant");
    auto hyper = RiemannianFamily::expanding_hyperbolic(hyperbolic_chart());
    auto samples = interior_samples(hyper, {0.1}, 3);
    CHECK(check_N_srf_tensor(hyper, 2.0, samples, 1e-5).holds);
  }

  TEST_CASE("unweighted N-check agrees with the plain check") {
    auto fam = RiemannianFamily::conformal_euclidean(2, box({-1, -1}, {1, 1}), -0.5);
    auto samples = interior_samples(fam, {0.0, 0.5}, 3);
    for (double N : {2.0, 3.0, 10.0, double(INFINITY)}) {
      auto a = check_N_srf_tensor(fam, N, samples, 1e-9), b = check_srf_tensor(fam, samples, 1e-9);
      CHECK(a.holds == b.holds);
      CHECK(a.min_eigenvalue == doctest::Approx(b.min_eigenvalue));
    }
  }

  TEST_CASE("weight identity on conformal and spherical families") {
    auto conformal = RiemannianFamily::conformal_euclidean(2, box({-1, -1}, {1, 1}), 1.0);
    auto r = check_weight_identity(conformal, 0.0, interior_samples(conformal, {0.0, 0.3}, 3), 1e-4);
    CHECK(r.holds);
    CHECK(r.max_residual <= 1e-6);
    auto sphere = RiemannianFamily::shrinking_sphere(sphere_chart());
    CHECK(check_weight_identity(sphere, 0.0, interior_samples(sphere, {0.1, 0.2}, 3), 1e-4).holds);
    auto bare = strip_closed_forms(sphere);
    CHECK(check_weight_identity(bare, 0.0, interior_samples(bare, {0.1, 0.2}, 3), 1e-4).holds);
    auto still = RiemannianFamily::flat(2, box({-1, -1}, {1, 1}));
    CHECK(check_weight_identity(still, 0.0, interior_samples(still, {0.5}, 2), 1e-12).max_residual <= 1e-12);
  }

  TEST_CASE("backward convexity and time reversal") {
    const double rate = 0.5, a = 1.0, T = 1.0;
    auto fam = RiemannianFamily::conformal_euclidean(2, box({-1, -1}, {1, 1}), rate);
    auto reversed = RiemannianFamily(2, fam.chart(), [&](double t, const Vec& x) { return fam.metric(T - t, x); });
    ScalarField V = [a](double, const Vec& x) { return 0.5 * a * x.squaredNorm(); };
    for (double t : {0.0, 0.25, 0.5}) {
      const Vec x = point({0.1, 0.2});
      const double c = std::exp(2 * rate * t);
      // Hess V = a I against 1/2 dg/dt = rate c I, measured relative to g = c I.
      auto v = check_backward_convexity(fam, V, {{t, x}}, 1e-9);
      CHECK(v.min_eigenvalue == doctest::Approx((a - rate * c) / c).epsilon(1e-6));
      auto w = check_backward_convexity(reversed, V, {{T - t, x}}, 1e-9);
      CHECK(w.min_eigenvalue == doctest::Approx((a + rate * c) / c).epsilon(1e-6));
    }
    ScalarField flat_V = [](double, const Vec& x) { return 0.25 * x.squaredNorm(); };
    CHECK_FALSE(check_backward_convexity(fam, flat_V, {{0.5, point({0.0, 0.0})}}, 1e-9).holds);
  }

  TEST_CASE("gradient flow of a quadratic on the line") {
    auto fam = RiemannianFamily::flat(1, box({-10}, {10}));
    auto grid = TimeGrid::uniform(0.0, 1.0, 10);
    auto tr = gradient_flow(fam, sq_half, grid, point({2.0}));
    REQUIRE(tr.points.size() == grid.size());
    CHECK_FALSE(tr.truncated);
    for (std::size_t k = 0; k < grid.size(); ++k)
      CHECK(tr.points[k](0) == doctest::Approx(2.0 * std::exp(grid[k] - 1.0)).epsilon(1e-8));
    auto fixed = gradient_flow(fam, sq_half, grid, point({0.0}));
    for (const auto& p : fixed.points) CHECK(std::abs(p(0)) < 1e-12);
  }

  TEST_CASE("gradient flow truncates when it leaves the chart") {
    auto fam = RiemannianFamily::flat(1, box({-10}, {10}));
    ScalarField down = [](double, const Vec& x) { return -0.5 * x.squaredNorm(); };
    auto tr = gradient_flow(fam, down, TimeGrid::uniform(0.0, 5.0, 10), point({1.0}));
    CHECK(tr.truncated);
    CHECK(tr.first_valid > 0);
    CHECK(tr.points.size() < 11);
    CHECK_THROWS_AS(gradient_flow(fam, down, TimeGrid({0.0, 1.0}), point({11.0})), InvalidInput);
  }

  TEST_CASE("distance expansion along convex and concave flows") {
    auto fam = RiemannianFamily::flat(1, box({-50}, {50}));
    auto grid = TimeGrid::uniform(0.0, 1.0, 20);
    auto a = gradient_flow(fam, sq_half, grid, point({1.0}));
    auto b = gradient_flow(fam, sq_half, grid, point({2.0}));
    auto v = check_distance_expansion(fam, a, b, 1e-9);
    CHECK(v.holds);
    for (std::size_t k = 0; k < grid.size(); ++k)
      CHECK(v.distances[k] == doctest::Approx(std::exp(grid[k] - 1.0)).epsilon(1e-8));
    auto same = check_distance_expansion(fam, a, a, 1e-12);
    for (double d : same.distances) CHECK(d == 0.0);

    ScalarField down = [](double, const Vec& x) { return -0.5 * x.squaredNorm(); };
    auto c = gradient_flow(fam, down, grid, point({1.0}));
    auto d = gradient_flow(fam, down, grid, point({2.0}));
    auto w = check_distance_expansion(fam, c, d, 1e-9);
    CHECK_FALSE(w.holds);
    CHECK(w.min_increment < 0);
  }

  TEST_CASE("EVI along a gradient-flow trajectory") {
    auto fam = RiemannianFamily::flat(1, box({-10}, {10}));
    // The comparison point 0.7 is crossed by the trajectory, where the inequality is tight and
    // only the second-order time differencing error remains; it shrinks like the step squared.
    std::vector<Vec> comparisons{point({-1.0}), point({0.0}), point({0.7}), point({3.0})};
    double previous = INFINITY;
    for (std::size_t intervals : {40, 160}) {
      auto grid = TimeGrid::uniform(0.0, 1.0, intervals);
      auto tr = gradient_flow(fam, sq_half, grid, point({1.5}));
      ChartEviModel model(fam, sq_half, grid);
      const double h = 1.0 / static_cast<double>(intervals);
      auto v = check_evi(model, tr.points, comparisons, h * h);
      CAPTURE(intervals);
      CHECK(v.holds);
      CHECK(-v.min_slack < previous / 8);
      previous = -v.min_slack;
    }
    CHECK_THROWS_AS(ChartEviModel(RiemannianFamily::shrinking_sphere(sphere_chart()), sq_half, TimeGrid::uniform(0.0, 1.0, 4)), InvalidInput);
  }

  TEST_CASE("model distances") {
    auto sphere = RiemannianFamily::shrinking_sphere(sphere_chart());
    const double pi = std::acos(-1.0);
    CHECK(sphere.distance(0.0, point({pi / 2, 0.0}), point({pi / 2, pi / 2})) == doctest::Approx(pi / 2));
    CHECK(sphere.distance(0.375, point({pi / 2, 0.0}), point({pi / 2, pi / 2})) == doctest::Approx(pi / 4));
    auto hyper = RiemannianFamily::expanding_hyperbolic(hyperbolic_chart());
    CHECK(hyper.distance(0.0, point({0.0, 1.0}), point({0.0, std::exp(1.0)})) == doctest::Approx(1.0));
    auto generic = strip_closed_forms(sphere);
    CHECK_THROWS_AS(generic.distance(0.0, point({1.0, 0.0}), point({1.0, 0.1})), InvalidInput);
  }
}
