#include "srf/dynconv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "srf/error.hpp"

namespace srf {

namespace {

// (+inf) - (+inf) = +inf: an undefined slack never counts as a violation.
double clean(double slack) { return std::isnan(slack) ? kInfinity : slack; }

}  // namespace

Potential Potential::tabulated(std::vector<std::vector<double>> values) {
  for (const auto& row : values)
    for (double v : row)
      if (std::isnan(v) || v == -kInfinity) throw InvalidInput("potential values must be finite or +inf");
  auto table = std::make_shared<std::vector<std::vector<double>>>(std::move(values));
  return Potential("tabulated", [table](std::size_t t, std::size_t x) {
    if (t >= table->size() || x >= (*table)[t].size()) throw InvalidInput("tabulated potential index out of range");
    return (*table)[t][x];
  });
}

Potential Potential::quadratic(const DiscreteGeodesicSpace& space, std::size_t center, double coefficient,
                               double offset) {
  if (center >= space.vertex_count()) throw InvalidInput("quadratic potential center out of range");
  return Potential("quadratic", [&space, center, coefficient, offset](std::size_t t, std::size_t x) {
    double d = space.distance(t, center, x);
    return 0.5 * coefficient * d * d + offset;
  });
}

Potential Potential::entropy_delegate(std::vector<double> reference,
                                      std::function<double(std::size_t, std::size_t)> f) {
  for (double m : reference)
    if (!(m >= 0) || !std::isfinite(m)) throw InvalidInput("reference measure must be finite and non-negative");
  return Potential("entropy-delegate", [m = std::move(reference), f = std::move(f)](std::size_t t, std::size_t x) {
    if (m[x] <= 0) return kInfinity;
    return (f ? f(t, x) : 0.0) - std::log(m[x]);
  });
}

std::string to_string(ConvexityForm f) {
  switch (f) {
    case ConvexityForm::Slope: return "slope";
    case ConvexityForm::Strain: return "strain";
    case ConvexityForm::Integrated: return "integrated";
    case ConvexityForm::Moderate: return "moderate";
    case ConvexityForm::Triple: return "triple";
    case ConvexityForm::SingleSlope: return "single-slope";
  }
  return "?";
}

std::string to_string(NConvexityForm f) {
  switch (f) {
    case NConvexityForm::Slope: return "N-slope";
    case NConvexityForm::WeightedIntegral: return "N-weighted-integral";
    case NConvexityForm::PhiTransform: return "N-phi";
  }
  return "?";
}

ConvexityForm parse_convexity_form(const std::string& s) {
  for (auto f : {ConvexityForm::Slope, ConvexityForm::Strain, ConvexityForm::Integrated, ConvexityForm::Moderate,
                 ConvexityForm::Triple, ConvexityForm::SingleSlope})
    if (to_string(f) == s) return f;
  throw InvalidInput("unknown convexity form '" + s + "'");
}

double slope_at_start(const std::vector<double>& tau, const std::vector<double>& u) {
  return (u[1] - u[0]) / (tau[1] - tau[0]);
}

double slope_at_end(const std::vector<double>& tau, const std::vector<double>& u) {
  const std::size_t n = u.size();
  return (u[n - 1] - u[n - 2]) / (tau[n - 1] - tau[n - 2]);
}

namespace {

std::vector<std::pair<std::size_t, std::size_t>> default_pairs(const DiscreteGeodesicSpace& space,
                                                               const DynCheckOptions& opt) {
  if (!opt.pairs.empty()) {
    for (auto [a, b] : opt.pairs)
      if (a >= space.vertex_count() || b >= space.vertex_count()) throw InvalidInput("pair vertex out of range");
    return opt.pairs;
  }
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t x = 0; x < space.vertex_count(); ++x)
    for (std::size_t y = x + 1; y < space.vertex_count(); ++y) out.push_back({x, y});
  return out;
}

// Per-geodesic slack samples for one form.
using SlackFn = std::function<std::vector<std::pair<double, double>>(const DiscreteGeodesic&,
                                                                    const std::vector<double>&)>;

DynConvVerdict run_check(const DiscreteGeodesicSpace& space, const Potential& V, std::size_t t,
                         const std::string& form_name, bool existential, const DynCheckOptions& opt,
                         const SlackFn& slacks) {
  if (t >= space.grid().size()) throw InvalidInput("time index out of range");
  DynConvVerdict v;
  v.form = form_name;
  v.tolerance = opt.tol;
  for (auto [x0, x1] : default_pairs(space, opt)) {
    if (x0 == x1) continue;
    auto paths = shortest_paths(space, t, x0, x1, opt.path_cap);
    v.truncated = v.truncated || paths.truncated;
    double best_pair = -kInfinity;
    std::vector<DynSample> best_samples;
    for (std::size_t p = 0; p < paths.paths.size(); ++p) {
      auto g = geodesic_from_path(space, t, paths.paths[p]);
      std::vector<double> u(g.size());
      for (std::size_t i = 0; i < g.size(); ++i) u[i] = V(t, g.points[i]);
      std::vector<DynSample> samples;
      double worst = kInfinity;
      for (auto [tau, s] : slacks(g, u)) {
        s = clean(s);
        samples.push_back({x0, x1, p, tau, s});
        worst = std::min(worst, s);
      }
      if (existential) {
        if (worst > best_pair) {
          best_pair = worst;
          best_samples = std::move(samples);
        }
      } else {
        for (auto& s : samples) v.samples.push_back(s);
      }
    }
    if (existential)
      for (auto& s : best_samples) v.samples.push_back(s);
  }
  for (const auto& s : v.samples)
    if (s.slack < v.min_slack) {
      v.min_slack = s.slack;
      v.witness = s;
    }
  v.holds = v.min_slack >= -opt.tol;
  return v;
}

// Trapezoid rule on the given abscissae.
double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0;
  for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
  return s;
}

// Parameters strictly inside (0, limit] (or (0, limit) when open).
std::vector<std::size_t> interior_params(const DiscreteGeodesic& g, double limit, bool open) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 1; i + 1 < g.size(); ++i) {
    double tau = g.params[i];
    if (open ? tau < limit - 1e-12 : tau <= limit + 1e-12) idx.push_back(i);
  }
  return idx;
}

}  // namespace

DynConvVerdict check_dynamic_convexity(const DiscreteGeodesicSpace& space, const Potential& V, std::size_t t,
                                       ConvexityForm form, const DynCheckOptions& opt) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (t == 0) throw InvalidInput("no left difference at the first grid time");
  auto dsq = [&](std::size_t a, std::size_t b) { return left_derivative_sq(space, t, a, b); };

  SlackFn fn;
  bool existential = false;
  switch (form) {
    case ConvexityForm::Slope:
      fn = [&](const DiscreteGeodesic& g, const std::vector<double>& u) {
        double s = slope_at_end(g.params, u) - slope_at_start(g.params, u) + 0.5 * dsq(g.front(), g.back());
        return std::vector<std::pair<double, double>>{{nan, s}};
      };
      break;
    case ConvexityForm::Strain:
      fn = [&](const DiscreteGeodesic& g, const std::vector<double>& u) {
        double s = slope_at_end(g.params, u) - slope_at_start(g.params, u) + 0.5 * strain(space, g, t);
        return std::vector<std::pair<double, double>>{{nan, s}};
      };
      break;
    case ConvexityForm::Integrated:
      fn = [&](const DiscreteGeodesic& g, const std::vector<double>& u) {
        std::vector<std::pair<double, double>> out;
        std::vector<double> sig{0.0}, integrand{0.0};
        integrand[0] = dsq(g.front(), g.back());
        for (std::size_t i : interior_params(g, 0.5, true)) {
          const double tau = g.params[i];
          sig.push_back(tau);
          integrand.push_back(dsq(g.points[i], g.at(1 - tau)) / (1 - 2 * tau));
          const double lhs = u.front() + u.back() - u[i] - V(t, g.at(1 - tau));
          out.push_back({tau, lhs + 0.5 * trapezoid(sig, integrand)});
        }
        return out;
      };
      break;
    case ConvexityForm::Moderate:
      existential = true;
      fn = [&](const DiscreteGeodesic& g, const std::vector<double>& u) {
        std::vector<std::pair<double, double>> out;
        const double d = space.distance(t, g.front(), g.back());
        const double rate = dsq(g.front(), g.back());
        for (std::size_t i : interior_params(g, 0.5, false)) {
          const double tau = g.params[i];
          const double lhs = u.front() + u.back() - u[i] - V(t, g.at(1 - tau));
          out.push_back({tau, lhs + 0.5 * tau * rate + opt.lambda * tau * tau * d * d});
        }
        return out;
      };
      break;
    case ConvexityForm::Triple:
      fn = [&](const DiscreteGeodesic& g, const std::vector<double>& u) {
        std::vector<std::pair<double, double>> out;
        const std::size_t Q = 2 * (g.size() - 1);
        for (std::size_t i = 1; i + 1 < g.size(); ++i) {
          const double tau = g.params[i];
          std::vector<double> sig, val;
          for (std::size_t j = 0; j <= Q; ++j) {
            const double s = static_cast<double>(j) / static_cast<double>(Q);
            sig.push_back(s);
            val.push_back(j == Q ? 0.0 : dsq(g.at(s * tau), g.at(1 - s + s * tau)) / (1 - s));
          }
          const double rhs = 0.5 * tau * (1 - tau) * trapezoid(sig, val);
          out.push_back({tau, (1 - tau) * u.front() + tau * u.back() - u[i] + rhs});
        }
        return out;
      };
      break;
    case ConvexityForm::SingleSlope:
      fn = [&](const DiscreteGeodesic& g, const std::vector<double>& u) {
        std::vector<double> sig{0.0}, val{0.0};
        for (std::size_t i = 1; i < g.size(); ++i) {
          sig.push_back(g.params[i]);
          val.push_back(dsq(g.front(), g.points[i]) / g.params[i]);
        }
        const double rhs = u.back() - u.front() + 0.5 * trapezoid(sig, val);
        return std::vector<std::pair<double, double>>{{nan, rhs - slope_at_start(g.params, u)}};
      };
      break;
  }
  return run_check(space, V, t, to_string(form), existential, opt, fn);
}

DynConvVerdict check_dynamic_N_convexity(const DiscreteGeodesicSpace& space, const Potential& V, std::size_t t,
                                         double N, NConvexityForm form, const DynCheckOptions& opt) {
  if (!(N > 0)) throw InvalidInput("N must be positive");
  if (t == 0) throw InvalidInput("no left difference at the first grid time");
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double invN = std::isinf(N) ? 0.0 : 1.0 / N;
  auto dsq = [&](std::size_t a, std::size_t b) { return left_derivative_sq(space, t, a, b); };
  SlackFn fn;
  bool existential = true;
  switch (form) {
    case NConvexityForm::Slope:
      existential = false;
      fn = [&](const DiscreteGeodesic& g, const std::vector<double>& u) {
        const double dv = u.front() - u.back();
        double s = slope_at_end(g.params, u) - slope_at_start(g.params, u) + 0.5 * dsq(g.front(), g.back()) -
                   invN * dv * dv;
        return std::vector<std::pair<double, double>>{{nan, s}};
      };
      break;
    case NConvexityForm::WeightedIntegral:
      fn = [&](const DiscreteGeodesic& g, const std::vector<double>& u) {
        std::vector<std::pair<double, double>> out;
        const double d = space.distance(t, g.front(), g.back());
        const double rate = dsq(g.front(), g.back());
        for (std::size_t i : interior_params(g, 0.5, false)) {
          const double tau = g.params[i];
          // Segment-wise derivative, weight evaluated at segment midpoints.
          double energy = 0.0;
          for (std::size_t j = 1; j < g.size(); ++j) {
            const double ds = g.params[j] - g.params[j - 1];
            if (ds <= 0) continue;
            const double slope = (u[j] - u[j - 1]) / ds;
            energy += lambda_weight(tau, 0.5 * (g.params[j] + g.params[j - 1])) * slope * slope * ds;
          }
          const double lhs = u.front() + u.back() - u[i] - V(t, g.at(1 - tau));
          out.push_back({tau, lhs + 0.5 * tau * rate + opt.lambda * tau * tau * d * d - tau * invN * energy});
        }
        return out;
      };
      break;
    case NConvexityForm::PhiTransform:
      fn = [&](const DiscreteGeodesic& g, const std::vector<double>& u) {
        std::vector<std::pair<double, double>> out;
        const double d = space.distance(t, g.front(), g.back());
        const double rate = dsq(g.front(), g.back());
        for (std::size_t i : interior_params(g, 0.5, false)) {
          const double tau = g.params[i];
          const double A = u.front() - u[i], B = u.back() - V(t, g.at(1 - tau)), D = u.front() - u.back();
          const double base = (A + B) / tau + 0.5 * rate + opt.lambda * tau * d * d;
          // Linear in 1/N' over the admissible range, so the endpoints decide.
          double s = base;
          const double n_min = std::max(N, 2 * tau * (std::abs(D) + 0.5 * opt.lambda * d * d));
          if (std::isfinite(n_min)) s = std::min(s, base + ((A * A + B * B) / tau - D * D) / n_min);
          out.push_back({tau, s});
        }
        return out;
      };
      break;
  }
  return run_check(space, V, t, to_string(form), existential, opt, fn);
}

DiscreteGeodesic build_min_geodesic(const DiscreteGeodesicSpace& space, const Potential& V, std::size_t t,
                                    std::size_t x0, std::size_t x1, std::size_t depth) {
  if (t >= space.grid().size()) throw InvalidInput("time index out of range");
  if (x0 >= space.vertex_count() || x1 >= space.vertex_count()) throw InvalidInput("vertex out of range");
  const std::size_t n = std::size_t{1} << depth;
  const double mesh = space.max_edge_length(t);
  const double tol = 1e-12 * std::max(1.0, space.diameter(t));
  std::vector<std::size_t> pts(n + 1);
  pts[0] = x0;
  pts[n] = x1;
  for (std::size_t step = n; step >= 2; step /= 2) {
    for (std::size_t lo = 0; lo + step <= n; lo += step) {
      const std::size_t a = pts[lo], b = pts[lo + step];
      const double dab = space.distance(t, a, b);
      std::size_t best = space.vertex_count();
      double best_v = kInfinity, best_gap = kInfinity;
      for (std::size_t z = 0; z < space.vertex_count(); ++z) {
        const double da = space.distance(t, a, z), db = space.distance(t, z, b);
        if (da + db > dab + tol) continue;
        const double gap = std::abs(da - db);
        if (gap > mesh + tol) continue;
        const double vz = V(t, z);
        if (best == space.vertex_count() || vz < best_v - 1e-14 ||
            (std::abs(vz - best_v) <= 1e-14 && gap < best_gap - tol)) {
          best = z;
          best_v = vz;
          best_gap = gap;
        }
      }
      if (best == space.vertex_count()) throw NumericalFailure("mesh too coarse for a midpoint");
      pts[lo + step / 2] = best;
    }
  }
  DiscreteGeodesic g;
  g.time = t;
  g.length = space.distance(t, x0, x1);
  g.points = pts;
  for (std::size_t i = 0; i <= n; ++i) g.params.push_back(static_cast<double>(i) / static_cast<double>(n));
  return g;
}

double reparam_source_time(double K, double t) {
  const double f = 1 - 2 * K * t;
  if (!(f > 0)) throw InvalidInput("reparametrization requires 2Kt < 1");
  if (K == 0) return t;
  return -std::log(f) / (2 * K);
}

Reparametrization reparametrize_K(const DiscreteGeodesicSpace& space, double K) {
  const auto& grid = space.grid();
  const bool stat = space.is_static();
  Reparametrization r{space, {}, {}};
  std::vector<std::vector<double>> lengths(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double f = 1 - 2 * K * grid[k];
    const double s = reparam_source_time(K, grid[k]);
    r.factors.push_back(f);
    r.source_times.push_back(s);
    std::vector<double> base;
    if (stat) {
      base = space.lengths()[0];
    } else {
      if (s < grid.front() - 1e-12 || s > grid.back() + 1e-12)
        throw InvalidInput("reparametrized time leaves the grid of a non-static space");
      const std::size_t j = std::min(grid.locate(s), grid.size() - 2);
      const double w = std::clamp((s - grid[j]) / (grid[j + 1] - grid[j]), 0.0, 1.0);
      base.resize(space.edges().size());
      for (std::size_t e = 0; e < base.size(); ++e)
        base[e] = (1 - w) * space.length(j, e) + w * space.length(j + 1, e);
    }
    for (double& l : base) l *= std::sqrt(f);
    lengths[k] = std::move(base);
  }
  r.space = space.with_lengths(grid, std::move(lengths));
  return r;
}

std::vector<std::size_t> DiscreteEviModel::geodesic(std::size_t k, Point a, Point b, std::size_t n) const {
  auto paths = shortest_paths(space_, k, a, b, 1);
  auto g = geodesic_from_path(space_, k, paths.paths.front());
  std::vector<Point> out;
  for (std::size_t j = 0; j <= n; ++j) out.push_back(g.at(static_cast<double>(j) / static_cast<double>(n)));
  return out;
}

}  // namespace srf
