#include <doctest.h>

#include <cmath>
#include <random>

#include "srf/ddi.hpp"
#include "srf/error.hpp"

using namespace srf;

namespace {

Mat two_point_metric(double d) {
  Mat m(2, 2);
  m << 0, d, d, 0;
  return m;
}

// Points in the plane with a per-time stretch of the first coordinate.
TimedMmInstance random_instance(std::mt19937& rng, std::size_t n, const TimeGrid& grid) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Eigen::Vector2d> pts(n);
  for (auto& p : pts) p = {u(rng), u(rng)};
  const double rate = u(rng) - 0.5;
  std::vector<Mat> ds;
  std::vector<Vec> fs;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    Mat d(n, n);
    const double s = 1 + rate * grid[k];
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        Eigen::Vector2d v = pts[i] - pts[j];
        v(0) *= s;
        d(i, j) = v.norm();
      }
    ds.push_back(d);
    Vec f(n);
    for (auto& x : f) x = 0.3 * (u(rng) - 0.5);
    fs.push_back(f);
  }
  Vec base(n);
  for (auto& x : base) x = 0.2 + u(rng);
  return TimedMmInstance(grid, ds, fs, base);
}

}  // namespace

TEST_SUITE("ddi") {
  TEST_CASE("instances validate metrics, weights and base") {
    TimeGrid g({0.0, 1.0});
    Mat bad = two_point_metric(1.0);
    bad(0, 1) = 2.0;
    CHECK_THROWS_AS(TimedMmInstance(g, {bad, bad}, {}, Vec::Ones(2)), InvalidInput);
    CHECK_THROWS_AS(TimedMmInstance(g, {two_point_metric(0.0), two_point_metric(1.0)}, {}, Vec::Ones(2)),
                    InvalidInput);
    Mat tri(3, 3);
    tri << 0, 1, 5, 1, 0, 1, 5, 1, 0;
    CHECK_THROWS_AS(TimedMmInstance(TimeGrid({0.0}), {tri}, {}, Vec::Ones(3)), InvalidInput);
    CHECK_THROWS_AS(TimedMmInstance(g, {two_point_metric(1.0)}, {}, Vec::Ones(2)), InvalidInput);
    CHECK_THROWS_AS(TimedMmInstance(g, {two_point_metric(1.0), two_point_metric(1.0)}, {}, Vec::Zero(2)),
                    InvalidInput);
  }

  TEST_CASE("normalization keeps the evolving measures") {
    std::mt19937 rng(41);
    auto inst = random_instance(rng, 3, TimeGrid::uniform(0.0, 1.0, 2));
    auto n = inst.normalized();
    CHECK(n.m.sum() == doctest::Approx(1.0).epsilon(1e-14));
    for (std::size_t k = 0; k < 3; ++k) {
      const Vec lhs = (-n.f[k]).array().exp() * n.m.array();
      const Vec rhs = (-inst.weight(k)).array().exp() * inst.base().array();
      CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12);
    }
    CHECK_THROWS_AS(inst.normalized(2.0), InvalidInput);
  }

  TEST_CASE("gluings and the identity are metric couplings") {
    std::mt19937 rng(42);
    auto a = random_instance(rng, 3, TimeGrid({0.0}));
    auto b = random_instance(rng, 2, TimeGrid({0.0}));
    const Mat& d = a.distance(0);
    const Mat& dt = b.distance(0);
    for (std::size_t x = 0; x < 3; ++x)
      for (std::size_t y = 0; y < 2; ++y) CHECK(is_metric_coupling(d, dt, gluing_coupling(d, dt, x, y, 0.3)));
    CHECK(is_metric_coupling(d, d, d));
    CHECK(is_metric_coupling(d, dt, feasible_metric_coupling(d, dt)));
    double worst = 0;
    Mat h = Mat::Zero(3, 2);
    CHECK_FALSE(is_metric_coupling(d, dt, h, 1e-9, &worst));
    CHECK(worst > 0);
    CHECK_THROWS_AS(gluing_coupling(d, dt, 0, 0, -1.0), InvalidInput);
  }

  TEST_CASE("one point against one point glues at zero") {
    Mat z = Mat::Zero(1, 1);
    CHECK(feasible_metric_coupling(z, z)(0, 0) == 0.0);
    CHECK(optimal_metric_coupling(z, z, Mat::Ones(1, 1), Mat::Constant(1, 1, 3.0))(0, 0) ==
          doctest::Approx(0.0).epsilon(1e-12));
  }

  TEST_CASE("optimal coupling of two two-point spaces") {
    // Diagonal weights: by symmetry h(a,a~) = h(b,b~) = u, h(a,b~) = h(b,a~) = v with
    // u + v >= 2 and v - u <= 1, so u = 1/2, v = 3/2.
    const Mat d = two_point_metric(1.0), dt = two_point_metric(2.0);
    const Mat w = Mat::Identity(2, 2);
    const Mat h = optimal_metric_coupling(d, dt, w, feasible_metric_coupling(d, dt));
    CHECK(is_metric_coupling(d, dt, h));
    CHECK(h(0, 0) == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(h(1, 1) == doctest::Approx(0.5).epsilon(1e-6));
    // Grid scan over the symmetric family confirms no feasible point does better.
    double best = INFINITY;
    for (int i = 0; i <= 60; ++i)
      for (int j = 0; j <= 60; ++j) {
        const double u = i / 20.0, v = j / 20.0;
        Mat g(2, 2);
        g << u, v, v, u;
        if (is_metric_coupling(d, dt, g)) best = std::min(best, 2 * u * u);
      }
    CHECK(best == doctest::Approx(0.5));
    CHECK(h(0, 0) * h(0, 0) + h(1, 1) * h(1, 1) <= best + 1e-6);
  }

  TEST_CASE("identical instances are at distance zero") {
    std::mt19937 rng(43);
    auto a = random_instance(rng, 3, TimeGrid::uniform(0.0, 1.0, 2));
    auto r = ddi_distance(a, a);
    CHECK(r.value <= 1e-6);
    CHECK(r.upper_bound);
    CHECK(r.metric_couplings.size() == 3);
  }

  TEST_CASE("one-point instances differ by their weights") {
    TimeGrid g({0.0, 0.5, 1.0});
    std::vector<Mat> d(3, Mat::Zero(1, 1));
    TimedMmInstance a(g, d, std::vector<Vec>(3, Vec::Constant(1, 0.4)), Vec::Ones(1));
    TimedMmInstance b(g, d, std::vector<Vec>(3, Vec::Constant(1, -0.3)), Vec::Ones(1));
    auto r = ddi_distance(a, b);
    CHECK(r.value == doctest::Approx(0.7).epsilon(1e-9));
    CHECK(r.quadratic_term == doctest::Approx(0.0).epsilon(1e-12));
  }

  TEST_CASE("weight perturbation on one vertex of mass one half") {
    // f~ moves by -delta and +delta around the reference time on vertex 0, so both
    // normalized measures are uniform and every coupling pays delta on half the mass.
    const double delta = 0.3;
    TimeGrid g({0.0, 1.0});
    std::vector<Mat> d(2, two_point_metric(1.0));
    TimedMmInstance a(g, d, {}, Vec::Ones(2));
    Vec f0(2), f1(2);
    f0 << -delta, 0;
    f1 << delta, 0;
    TimedMmInstance b(g, d, {f0, f1}, Vec::Ones(2));
    auto r = ddi_distance(a, b);
    CHECK(r.value == doctest::Approx(delta / 2).epsilon(1e-8));
    CHECK(r.weight_term == doctest::Approx(delta / 2).epsilon(1e-8));
  }

  TEST_CASE("evaluation matches the reported split") {
    std::mt19937 rng(44);
    auto grid = TimeGrid::uniform(0.0, 1.0, 2);
    auto a = random_instance(rng, 2, grid), b = random_instance(rng, 3, grid);
    auto r = ddi_distance(a, b);
    auto e = evaluate_ddi(a, b, r.coupling, r.metric_couplings);
    CHECK(e.value == doctest::Approx(r.value).epsilon(1e-12));
    CHECK(r.value == doctest::Approx(std::sqrt(r.quadratic_term) + r.weight_term).epsilon(1e-12));
    CHECK((r.coupling.rowwise().sum() - a.normalized().m).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((r.coupling.colwise().sum().transpose() - b.normalized().m).cwiseAbs().maxCoeff() <= 1e-9);
    for (std::size_t k = 0; k < 3; ++k) CHECK(is_metric_coupling(a.distance(k), b.distance(k), r.metric_couplings[k]));
    CHECK(to_string(r.status) != "?");
    CHECK_THROWS_AS(ddi_distance(a, random_instance(rng, 2, TimeGrid({0.0, 1.0}))), InvalidInput);
  }

  TEST_CASE("property: symmetry and triangle inequality on small instances") {
    std::mt19937 rng(45);
    auto grid = TimeGrid::uniform(0.0, 1.0, 2);
    for (int trial = 0; trial < 4; ++trial) {
      auto a = random_instance(rng, 2 + trial % 2, grid);
      auto b = random_instance(rng, 2, grid);
      auto c = random_instance(rng, 1 + trial % 3, grid);
      const double ab = ddi_distance(a, b).value, ba = ddi_distance(b, a).value;
      const double bc = ddi_distance(b, c).value, ac = ddi_distance(a, c).value;
      CAPTURE(trial);
      CHECK(std::abs(ab - ba) <= 1e-6);
      CHECK(ac <= ab + bc + 2e-6);
    }
  }

  TEST_CASE("alternation agrees with a scan over two-by-two couplings") {
    std::mt19937 rng(46);
    auto grid = TimeGrid::uniform(0.0, 1.0, 2);
    for (int trial = 0; trial < 3; ++trial) {
      auto a = random_instance(rng, 2, grid), b = random_instance(rng, 2, grid);
      const Vec m = a.normalized().m, mt = b.normalized().m;
      double best = INFINITY;
      const double lo = std::max(0.0, m(0) - mt(1)), hi = std::min(m(0), mt(0));
      for (int i = 0; i <= 40; ++i) {
        const double p = lo + (hi - lo) * i / 40.0;
        Mat pi(2, 2);
        pi << p, m(0) - p, mt(0) - p, mt(1) - m(0) + p;
        std::vector<Mat> hs;
        for (std::size_t k = 0; k < grid.size(); ++k) {
          const Mat& d = a.distance(k);
          const Mat& dt = b.distance(k);
          hs.push_back(optimal_metric_coupling(d, dt, pi, feasible_metric_coupling(d, dt)));
        }
        best = std::min(best, evaluate_ddi(a, b, pi, hs).value);
      }
      const double v = ddi_distance(a, b).value;
      CAPTURE(trial);
      CHECK(v <= best + 1e-9);
      CHECK(v >= 0.95 * best);
    }
  }

  TEST_CASE("static distance of a space to itself") {
    std::mt19937 rng(47);
    auto a = random_instance(rng, 3, TimeGrid({0.0}));
    const Vec m = a.normalized().m;
    CHECK(static_distance(a.distance(0), m, a.distance(0), m).value <= 1e-6);
  }

  TEST_CASE("slice bound on identical, static and random instances") {
    std::mt19937 rng(48);
    auto grid = TimeGrid::uniform(0.0, 1.0, 2);
    auto a = random_instance(rng, 2, grid);
    auto same = check_slice_bound(a, a, 1);
    CHECK(same.holds);
    CHECK(same.static_value <= 1e-6);

    std::vector<Mat> d1(3, two_point_metric(1.0)), d2(3, two_point_metric(1.5));
    TimedMmInstance s1(grid, d1, {}, Vec::Ones(2)), s2(grid, d2, {}, Vec::Ones(2));
    auto st = check_slice_bound(s1, s2, 0);
    CHECK(st.lipschitz == 0.0);
    CHECK(st.holds);
    if (!st.short_interval) CHECK(st.bound == doctest::Approx(st.radius));

    for (int trial = 0; trial < 3; ++trial) {
      auto x = random_instance(rng, 2, grid), y = random_instance(rng, 1 + trial % 2, grid);
      for (std::size_t s = 0; s < grid.size(); ++s) {
        auto r = check_slice_bound(x, y, s);
        CAPTURE(trial);
        CAPTURE(s);
        CHECK(r.holds);
        CHECK(r.radius == doctest::Approx(std::cbrt(grid.span()) * std::pow(r.ddi, 2.0 / 3.0)));
      }
    }
    CHECK_THROWS_AS(check_slice_bound(a, a, 7), InvalidInput);
  }
}
