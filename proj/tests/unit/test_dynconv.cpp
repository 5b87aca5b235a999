#include <doctest.h>

#include <cmath>
#include <random>

#include "srf/convexity1d.hpp"
#include "srf/dynconv.hpp"
#include "srf/error.hpp"

using namespace srf;

namespace {

const ConvexityForm kAllForms[] = {ConvexityForm::Slope,  ConvexityForm::Strain, ConvexityForm::Integrated,
                                   ConvexityForm::Moderate, ConvexityForm::Triple, ConvexityForm::SingleSlope};

// V(x) = a/2 (x - c)^2 + b x^3 on the vertex positions of a path graph with spacing h.
Potential line_potential(double h, double a, double c, double b = 0.0) {
  return Potential("line", [=](std::size_t, std::size_t x) {
    const double p = h * static_cast<double>(x);
    return 0.5 * a * (p - c) * (p - c) + b * p * p * p;
  });
}

}  // namespace

TEST_SUITE("dynconv") {
  TEST_CASE("static space with a convex potential passes every form") {
    auto space = make_path_graph(9, 1.0, TimeGrid({0.0, 1.0}));
    auto V = line_potential(1.0 / 8, 2.0, 0.3);
    for (auto form : kAllForms) {
      auto v = check_dynamic_convexity(space, V, 1, form, {1e-12});
      CAPTURE(to_string(form));
      CHECK(v.holds);
      CHECK(v.min_slack >= -1e-12);
      CHECK_FALSE(v.truncated);
    }
  }

  TEST_CASE("concave potential fails with a witness through the maximum") {
    auto space = make_path_graph(9, 2.0, TimeGrid({0.0, 1.0}));
    // V = -x^2 centred at vertex 4
    auto V = line_potential(0.25, -2.0, 1.0);
    auto v = check_dynamic_convexity(space, V, 1, ConvexityForm::Slope, {1e-12});
    CHECK_FALSE(v.holds);
    REQUIRE(v.witness);
    CHECK(v.witness->x0 <= 4);
    CHECK(v.witness->x1 >= 4);
    // Slope difference along the full path: u'' = -2 * 4 scaled by (1 - h) with h = 1/8.
    CHECK(v.min_slack == doctest::Approx(-2.0 * 4.0 * (1 - 1.0 / 8)));
  }

  TEST_CASE("K-reparametrized static space with a K-convex potential") {
    const double K = 0.5;
    auto base = make_path_graph(17, 1.0, TimeGrid::uniform(0, 0.5, 5));
    auto r = reparametrize_K(base, K);
    auto V = line_potential(1.0 / 16, K, 0.5);
    for (std::size_t t = 1; t < 6; ++t) {
      auto v = check_dynamic_convexity(r.space, V, t, ConvexityForm::Slope, {1e-12});
      // d_t^2 is affine in t with rate -2K d_0^2, so the exact slack is -K d_0^2 h with h the
      // parameter step of the geodesic.
      for (const auto& s : v.samples) {
        const double d = r.space.distance(0, s.x0, s.x1);
        const double h = 1.0 / static_cast<double>(s.x1 - s.x0);
        CHECK(s.slack == doctest::Approx(-K * d * d * h).scale(1e-12));
      }
    }
  }

  TEST_CASE("reparametrization arithmetic") {
    CHECK(reparam_source_time(0.25, 1.0) == doctest::Approx(2 * std::log(2.0)));
    CHECK(reparam_source_time(0.0, 0.7) == 0.7);
    CHECK(reparam_source_time(1e-9, 0.7) == doctest::Approx(0.7));
    CHECK_THROWS_AS(reparam_source_time(0.5, 1.0), InvalidInput);
    auto base = make_cycle(6, 6.0, TimeGrid({0.0, 1.0}));
    auto r = reparametrize_K(base, 0.25);
    CHECK(r.factors[1] == doctest::Approx(0.5));
    CHECK(r.space.distance(1, 0, 3) == doctest::Approx(3 * std::sqrt(0.5)));
    auto r0 = reparametrize_K(base, 0.0);
    CHECK((r0.space.distances(1) - base.distances(1)).cwiseAbs().maxCoeff() == 0.0);
    // Geodesic sets are preserved per slice.
    CHECK(shortest_paths(r.space, 1, 0, 3).paths == shortest_paths(base, 1, 0, 3).paths);
  }

  TEST_CASE("N = inf reproduces the plain slope verdict") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> U(-2, 2);
    auto space = make_cycle(8, 8.0, TimeGrid::uniform(0, 1, 2), [](double t) { return 1 + 0.3 * t; });
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<std::vector<double>> table(3, std::vector<double>(8));
      for (auto& row : table)
        for (double& x : row) x = U(rng);
      auto V = Potential::tabulated(table);
      auto a = check_dynamic_convexity(space, V, 1, ConvexityForm::Slope);
      auto b = check_dynamic_N_convexity(space, V, 1, INFINITY, NConvexityForm::Slope);
      CHECK(a.holds == b.holds);
      CHECK(a.min_slack == doctest::Approx(b.min_slack));
    }
  }

  TEST_CASE("constant potential on a static circle: the N term vanishes") {
    auto space = make_cycle(32, 2 * M_PI, TimeGrid({0.0, 1.0}));
    std::vector<double> m(32, 1.0 / 32);
    auto V = Potential::entropy_delegate(m, [](std::size_t, std::size_t) { return 0.0; });
    for (auto form : {NConvexityForm::Slope, NConvexityForm::WeightedIntegral, NConvexityForm::PhiTransform}) {
      auto v = check_dynamic_N_convexity(space, V, 1, 3.0, form, {1e-12, {{0, 16}, {3, 9}}});
      CHECK(v.holds);
      CHECK(v.min_slack == doctest::Approx(0.0).scale(1e-12));
    }
  }

  TEST_CASE("N-slope form matches direct evaluation on a three-point geodesic") {
    auto space = make_path_graph(3, 2.0, TimeGrid({0.0, 1.0}));
    const double K = 1.0;
    auto V = line_potential(1.0, K, 0.0);  // V = x^2/2 at x = 0, 1, 2
    for (double N : {0.5, 1.0, 2.0, 8.0}) {
      auto v = check_dynamic_N_convexity(space, V, 1, N, NConvexityForm::Slope, {1e-12, {{0, 2}}});
      // tau = 0, 1/2, 1 ; u = 0, 1/2, 2 ; slopes 1 and 3 ; |Delta V| = 2
      const double direct = (3.0 - 1.0) - 4.0 / N;
      CHECK(v.min_slack == doctest::Approx(direct));
      CHECK(v.holds == (direct >= -1e-12));
    }
  }

  TEST_CASE("midpoint construction") {
    auto grid = TimeGrid({0.0});
    auto path = make_path_graph(5, 4.0, grid);
    auto flat = Potential("zero", [](std::size_t, std::size_t) { return 0.0; });
    auto g = build_min_geodesic(path, flat, 0, 0, 4, 2);
    CHECK(g.points == std::vector<std::size_t>{0, 1, 2, 3, 4});

    // 8-cycle from 0 to 4: the arc through 5,6,7 is cheaper.
    auto cyc = make_cycle(8, 8.0, grid);
    auto V = Potential("arc", [](std::size_t, std::size_t x) { return x >= 5 ? -1.0 : 0.0; });
    auto h = build_min_geodesic(cyc, V, 0, 0, 4, 2);
    CHECK(h.points == std::vector<std::size_t>{0, 7, 6, 5, 4});

    auto c4 = make_cycle(4, 4.0, grid);
    auto W = Potential("pick", [](std::size_t, std::size_t x) { return x == 3 ? -1.0 : 0.0; });
    CHECK(build_min_geodesic(c4, W, 0, 0, 2, 1).points == std::vector<std::size_t>{0, 3, 2});

    // Uneven edges: vertex 1 is only a mesh-midpoint but still the best available.
    DiscreteGeodesicSpace coarse(3, {{0, 1}, {1, 2}}, grid, {{1.0, 3.0}});
    CHECK(build_min_geodesic(coarse, flat, 0, 0, 2, 1).points == std::vector<std::size_t>{0, 1, 2});
  }

  TEST_CASE("EVI at a stationary minimizer") {
    auto space = make_path_graph(7, 3.0, TimeGrid::uniform(0, 1, 4));
    auto V = line_potential(0.5, 1.0, 1.5);  // minimum at vertex 3
    DiscreteEviModel model(space, V);
    std::vector<std::size_t> traj(5, 3), z{0, 2, 5, 6};
    auto v = check_evi(model, traj, z, 1e-12);
    CHECK(v.holds);
    for (const auto& s : v.samples) CHECK(s.slack == doctest::Approx(V(s.time, z[s.comparison]) - V(s.time, 3)));

    // Upward flows leave the minimizer; sliding down into it violates the inequality.
    std::vector<std::size_t> up{3, 3, 4, 5, 6}, down{6, 5, 4, 3, 3};
    CHECK(check_evi(model, up, {3}, 1e-12).holds);
    CHECK_FALSE(check_evi(model, down, {3}, 1e-12).holds);
  }

  TEST_CASE("form equivalence on semiconvex potentials under lambda control") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> U(-1, 1);
    auto grid = TimeGrid::uniform(0, 1, 4);
    for (int trial = 0; trial < 12; ++trial) {
      const double rate = 0.5 * U(rng);
      auto space = make_path_graph(9, 1.0, grid, [&](double t) { return std::exp(rate * t); });
      const double a = 3 * U(rng), b = U(rng);
      auto V = line_potential(1.0 / 8, a, 0.5, b);
      const auto ctl = estimate_controls(space);
      DynCheckOptions opt{1e-9};
      opt.lambda = ctl.lambda[2];
      auto slope = check_dynamic_convexity(space, V, 2, ConvexityForm::Slope, opt);
      auto integ = check_dynamic_convexity(space, V, 2, ConvexityForm::Integrated, opt);
      auto moder = check_dynamic_convexity(space, V, 2, ConvexityForm::Moderate, opt);
      // Clear-cut instances only: the forms differ by O(h) on samples.
      if (std::abs(slope.min_slack) > 0.3) {
        CHECK(slope.holds == integ.holds);
        CHECK(slope.holds == moder.holds);
      }
    }
  }

  TEST_CASE("triple form with margin implies the slope form") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> U(-1, 1);
    auto grid = TimeGrid::uniform(0, 1, 2);
    for (int trial = 0; trial < 20; ++trial) {
      auto space = make_path_graph(9, 1.0, grid, [&](double t) { return 1 + 0.2 * t; });
      auto V = line_potential(1.0 / 8, 2 * U(rng), 0.5, U(rng));
      auto tri = check_dynamic_convexity(space, V, 1, ConvexityForm::Triple, {1e-9});
      if (tri.min_slack >= 1e-3) CHECK(check_dynamic_convexity(space, V, 1, ConvexityForm::Slope, {1e-6}).holds);
    }
  }

  TEST_CASE("static K-convexity matches dynamic convexity of the reparametrized space") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> U(-1, 1);
    const std::size_t n = 17;
    const double h = 1.0 / (n - 1);
    auto base = make_path_graph(n, 1.0, TimeGrid({0.0, 0.1}));
    for (double K : {-1.0, 0.0, 1.0}) {
      auto r = reparametrize_K(base, K);
      for (int trial = 0; trial < 10; ++trial) {
        // With a = K + 2w the slope slack along the full path is 2w - a h and the static
        // triple slack has the sign of w, so |w| > 0.2 separates the verdicts.
        const double w = U(rng);
        auto V = line_potential(h, K + 2 * w, 0.5);
        // Static verdict along the full geodesic.
        std::vector<double> tau, val;
        for (std::size_t i = 0; i < n; ++i) {
          tau.push_back(static_cast<double>(i) * h);
          val.push_back(V(0, i));
        }
        auto stat = is_k_convex({tau, val}, K, 1e-9);
        auto dyn = check_dynamic_convexity(r.space, V, 1, ConvexityForm::Slope, {1e-9, {{0, n - 1}}});
        CAPTURE(w);
        if (std::abs(w) > 0.2) CHECK(stat.holds == dyn.holds);
      }
    }
  }

  TEST_CASE("argument errors") {
    auto space = make_path_graph(3, 2.0, TimeGrid({0.0, 1.0}));
    auto V = line_potential(1.0, 1.0, 0.0);
    CHECK_THROWS_AS(check_dynamic_convexity(space, V, 0, ConvexityForm::Slope), InvalidInput);
    CHECK_THROWS_AS(check_dynamic_N_convexity(space, V, 1, 0.0, NConvexityForm::Slope), InvalidInput);
    CHECK_THROWS_AS(parse_convexity_form("nonsense"), InvalidInput);
    CHECK(parse_convexity_form("single-slope") == ConvexityForm::SingleSlope);
  }
}
