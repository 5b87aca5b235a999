#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "srf/convexity1d.hpp"
#include "srf/error.hpp"
#include "srf/tgs.hpp"

namespace srf {

/// Time-dependent potential V_t(x) on the vertices of a space; +inf allowed.
class Potential {
 public:
  using Fn = std::function<double(std::size_t t, std::size_t x)>;

  Potential(std::string name, Fn fn) : name_(std::move(name)), fn_(std::move(fn)) {}

  double operator()(std::size_t t, std::size_t x) const { return fn_(t, x); }
  const std::string& name() const { return name_; }

  // values[t][x]
  static Potential tabulated(std::vector<std::vector<double>> values);
  // coefficient/2 * d_t(center, x)^2 + offset
  static Potential quadratic(const DiscreteGeodesicSpace& space, std::size_t center, double coefficient,
                             double offset = 0.0);
  // Entropy of the point mass at x relative to e^{-f_t} m: f_t(x) - log m(x).
  static Potential entropy_delegate(std::vector<double> reference, std::function<double(std::size_t, std::size_t)> f);

 private:
  std::string name_;
  Fn fn_;
};

enum class ConvexityForm { Slope, Strain, Integrated, Moderate, Triple, SingleSlope };
enum class NConvexityForm { Slope, WeightedIntegral, PhiTransform };

std::string to_string(ConvexityForm f);
std::string to_string(NConvexityForm f);
ConvexityForm parse_convexity_form(const std::string& s);

struct DynSample {
  std::size_t x0 = 0, x1 = 0;  // endpoint vertices
  std::size_t path = 0;        // index into the enumerated shortest paths
  double tau = 0.0;            // NaN for forms without a parameter
  double slack = 0.0;
};

struct DynConvVerdict {
  std::string form;
  bool holds = true;
  double min_slack = kInfinity;
  double tolerance = 0.0;
  bool truncated = false;  // some path enumeration hit its cap
  std::vector<DynSample> samples;
  std::optional<DynSample> witness;
};

struct DynCheckOptions {
  double tol = 1e-9;
  // Endpoint pairs; empty means all unordered vertex pairs x < y.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::size_t path_cap = kDefaultPathCap;
  double lambda = 0.0;  // log-Lipschitz lower control, used by the lambda-forms
};

// Strong forms quantify over every enumerated d_t geodesic; the moderate form
// keeps, per endpoint pair, the geodesic with the largest worst-case slack.
DynConvVerdict check_dynamic_convexity(const DiscreteGeodesicSpace& space, const Potential& V, std::size_t t,
                                       ConvexityForm form, const DynCheckOptions& opt = {});

DynConvVerdict check_dynamic_N_convexity(const DiscreteGeodesicSpace& space, const Potential& V, std::size_t t,
                                         double N, NConvexityForm form, const DynCheckOptions& opt = {});

// Geodesic through iterated V-minimizing midpoints, sampled at k / 2^depth.
DiscreteGeodesic build_min_geodesic(const DiscreteGeodesicSpace& space, const Potential& V, std::size_t t,
                                    std::size_t x0, std::size_t x1, std::size_t depth);

struct Reparametrization {
  DiscreteGeodesicSpace space;
  std::vector<double> source_times;  // s(t) for every grid time
  std::vector<double> factors;       // 1 - 2 K t
};

// d~_t^2 = (1 - 2Kt) d^2_{s(t)} with s(t) = -log(1 - 2Kt) / (2K).
Reparametrization reparametrize_K(const DiscreteGeodesicSpace& space, double K);
double reparam_source_time(double K, double t);

// Slack helpers shared with the measure-space checks.
double slope_at_start(const std::vector<double>& tau, const std::vector<double>& u);
double slope_at_end(const std::vector<double>& tau, const std::vector<double>& u);

// ------------------------------------------------------------------ EVI

/// A model of a time-dependent geodesic space suitable for the EVI check.
template <class M>
concept EviModel = requires(const M& m, std::size_t k, const typename M::Point& p, std::size_t n) {
  { m.grid() } -> std::convertible_to<const TimeGrid&>;
  { m.distance(k, p, p) } -> std::convertible_to<double>;
  { m.geodesic(k, p, p, n) } -> std::convertible_to<std::vector<typename M::Point>>;
  { m.potential(k, p) } -> std::convertible_to<double>;
};

struct EviSample {
  std::size_t time = 0;
  std::size_t comparison = 0;
  double slack = 0.0;
};

struct EviVerdict {
  bool holds = true;
  double min_slack = kInfinity;
  double tolerance = 0.0;
  std::vector<EviSample> samples;
  std::optional<EviSample> witness;
};

// Strain of uniformly sampled curve points restricted to [0, sigma]; sigma = prefix/(count-1).
template <EviModel M>
double prefix_strain(const M& model, std::size_t k, const std::vector<typename M::Point>& pts, std::size_t last) {
  const double dt = model.grid()[k] - model.grid()[k - 1];
  const double sigma = static_cast<double>(last) / static_cast<double>(pts.size() - 1);
  std::vector<double> best(last + 1, kInfinity);
  best[0] = 0.0;
  for (std::size_t j = 1; j <= last; ++j)
    for (std::size_t i = 0; i < j; ++i) {
      const double a = model.distance(k, pts[i], pts[j]), b = model.distance(k - 1, pts[i], pts[j]);
      const double dr = (static_cast<double>(j - i) / static_cast<double>(pts.size() - 1)) / sigma;
      best[j] = std::min(best[j], best[i] + (a * a - b * b) / dt / dr);
    }
  return best[last];
}

// Checks 1/2 d/ds d_t^2(x_s, z)|_{s=t-} + 1/2 b0_t(gamma) >= V_t(x_t) - V_t(z) along a trajectory
// given on the model's grid; the s-derivative is a second-order backward difference when two
// earlier samples exist. Times before first_time are skipped.
template <EviModel M>
EviVerdict check_evi(const M& model, const std::vector<typename M::Point>& trajectory,
                     const std::vector<typename M::Point>& comparisons, double tol, std::size_t first_time = 1,
                     std::size_t geodesic_samples = 16) {
  const auto& grid = model.grid();
  if (trajectory.size() != grid.size()) throw InvalidInput("trajectory must have one point per grid time");
  EviVerdict v;
  v.tolerance = tol;
  for (std::size_t k = std::max<std::size_t>(first_time, 1); k < grid.size(); ++k) {
    for (std::size_t c = 0; c < comparisons.size(); ++c) {
      const auto& z = comparisons[c];
      const double Vz = model.potential(k, z);
      if (!std::isfinite(Vz)) continue;
      auto dsq = [&](std::size_t s) {
        double d = model.distance(k, trajectory[s], z);
        return d * d;
      };
      double ds;
      const double h1 = grid[k] - grid[k - 1];
      if (k >= 2) {
        const double h2 = grid[k - 1] - grid[k - 2];
        // Backward three-point formula on an uneven grid.
        const double a = (2 * h1 + h2) / (h1 * (h1 + h2)), b = -(h1 + h2) / (h1 * h2), cc = h1 / (h2 * (h1 + h2));
        ds = a * dsq(k) + b * dsq(k - 1) + cc * dsq(k - 2);
      } else {
        ds = (dsq(k) - dsq(k - 1)) / h1;
      }
      auto pts = model.geodesic(k, trajectory[k], z, geodesic_samples);
      double b0 = 0.0;
      if (pts.size() >= 2) {
        std::vector<double> vals(pts.size(), 0.0);
        for (std::size_t j = 1; j < pts.size(); ++j) vals[j] = prefix_strain(model, k, pts, j);
        const double dsig = 1.0 / static_cast<double>(pts.size() - 1);
        for (std::size_t j = 1; j < pts.size(); ++j) b0 += 0.5 * (vals[j - 1] + vals[j]) * dsig;
      }
      const double slack = 0.5 * ds + 0.5 * b0 - model.potential(k, trajectory[k]) + Vz;
      EviSample s{k, c, slack};
      v.samples.push_back(s);
      if (slack < v.min_slack) {
        v.min_slack = slack;
        v.witness = s;
      }
    }
  }
  v.holds = v.min_slack >= -tol;
  return v;
}

/// EVI adapter for a discrete space: points are vertices, geodesics follow the
/// lexicographically first shortest path and are resampled by nearest arc length.
class DiscreteEviModel {
 public:
  using Point = std::size_t;
  DiscreteEviModel(const DiscreteGeodesicSpace& space, const Potential& V) : space_(space), V_(V) {}
  const TimeGrid& grid() const { return space_.grid(); }
  double distance(std::size_t k, Point a, Point b) const { return space_.distance(k, a, b); }
  double potential(std::size_t k, Point a) const { return V_(k, a); }
  std::vector<Point> geodesic(std::size_t k, Point a, Point b, std::size_t n) const;

 private:
  const DiscreteGeodesicSpace& space_;
  const Potential& V_;
};

}  // namespace srf
