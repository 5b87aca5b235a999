#include "srf/ddi.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "srf/network_simplex.hpp"
#include "srf/qp.hpp"

namespace srf {

namespace {

void validate_metric(const Mat& d, std::size_t n) {
  if (static_cast<std::size_t>(d.rows()) != n || static_cast<std::size_t>(d.cols()) != n)
    throw InvalidInput("distance matrix has the wrong size");
  for (std::size_t i = 0; i < n; ++i) {
    if (d(i, i) != 0.0) throw InvalidInput("distance matrix needs a zero diagonal");
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(d(i, j)) || d(i, j) < 0) throw InvalidInput("distances must be finite and nonnegative");
      if (std::abs(d(i, j) - d(j, i)) > 1e-12) throw InvalidInput("distance matrix is not symmetric");
      if (i != j && d(i, j) == 0.0) throw InvalidInput("distinct points at distance zero");
      for (std::size_t k = 0; k < n; ++k)
        if (d(i, j) > d(i, k) + d(k, j) + 1e-9) throw InvalidInput("distance matrix violates the triangle inequality");
    }
  }
}

// Trapezoid weights and interval length; a single time gets weight 1 and length 1.
std::pair<std::vector<double>, double> time_weights(const TimeGrid& g) {
  std::vector<double> w(g.size(), 0.0);
  if (g.size() == 1) return {{1.0}, 1.0};
  for (std::size_t k = 0; k + 1 < g.size(); ++k) {
    const double h = g[k + 1] - g[k];
    w[k] += h / 2;
    w[k + 1] += h / 2;
  }
  return {w, g.span()};
}

struct Constraints {
  Mat A;
  Vec b;
};

Constraints coupling_constraints(const Mat& d, const Mat& dt) {
  const auto n = d.rows(), m = dt.rows();
  auto var = [m](Eigen::Index x, Eigen::Index y) { return x * m + y; };
  std::vector<std::pair<std::vector<std::pair<Eigen::Index, double>>, double>> rows;
  for (Eigen::Index x = 0; x < n; ++x)
    for (Eigen::Index y = 0; y < m; ++y) rows.push_back({{{var(x, y), 1.0}}, 0.0});
  for (Eigen::Index y = 0; y < m; ++y)
    for (Eigen::Index x = 0; x < n; ++x)
      for (Eigen::Index x2 = 0; x2 < n; ++x2) {
        if (x2 == x) continue;
        rows.push_back({{{var(x, y), -1.0}, {var(x2, y), 1.0}}, -d(x, x2)});
        if (x < x2) rows.push_back({{{var(x, y), 1.0}, {var(x2, y), 1.0}}, d(x, x2)});
      }
  for (Eigen::Index x = 0; x < n; ++x)
    for (Eigen::Index y = 0; y < m; ++y)
      for (Eigen::Index y2 = 0; y2 < m; ++y2) {
        if (y2 == y) continue;
        rows.push_back({{{var(x, y), -1.0}, {var(x, y2), 1.0}}, -dt(y, y2)});
        if (y < y2) rows.push_back({{{var(x, y), 1.0}, {var(x, y2), 1.0}}, dt(y, y2)});
      }
  Constraints c{Mat::Zero(static_cast<Eigen::Index>(rows.size()), n * m), Vec(static_cast<Eigen::Index>(rows.size()))};
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (auto [j, a] : rows[r].first) c.A(static_cast<Eigen::Index>(r), j) = a;
    c.b(static_cast<Eigen::Index>(r)) = rows[r].second;
  }
  return c;
}

Vec flatten(const Mat& h) {
  Vec v(h.size());
  for (Eigen::Index x = 0; x < h.rows(); ++x)
    for (Eigen::Index y = 0; y < h.cols(); ++y) v(x * h.cols() + y) = h(x, y);
  return v;
}

Mat unflatten(const Vec& v, Eigen::Index n, Eigen::Index m) {
  Mat h(n, m);
  for (Eigen::Index x = 0; x < n; ++x)
    for (Eigen::Index y = 0; y < m; ++y) h(x, y) = v(x * m + y);
  return h;
}

std::vector<double> to_std(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

// W1 between the laws of the distance profiles d(x,.) under m and d~(y,.) under m~.
double profile_distance(const Vec& dx, const Vec& m, const Vec& dy, const Vec& mt) {
  std::map<double, double> diff;  // jump of F - G at each value
  for (Eigen::Index i = 0; i < dx.size(); ++i) diff[dx(i)] += m(i);
  for (Eigen::Index i = 0; i < dy.size(); ++i) diff[dy(i)] -= mt(i);
  double acc = 0, cdf = 0, prev = 0;
  bool first = true;
  for (auto [v, jump] : diff) {
    if (!first) acc += std::abs(cdf) * (v - prev);
    cdf += jump;
    prev = v;
    first = false;
  }
  return acc;
}

struct Problem {
  const TimedMmInstance& a;
  const TimedMmInstance& b;
  TimedMmInstance::Normalized na, nb;
  std::vector<double> w;
  double len = 1.0;
  Mat cost_b;  // weight term per cell
};

double quadratic_term(const Problem& P, const Mat& pi, const std::vector<Mat>& hs) {
  double acc = 0;
  for (std::size_t k = 0; k < hs.size(); ++k) acc += P.w[k] * (pi.array() * hs[k].array().square()).sum();
  return acc / P.len;
}

double objective(const Problem& P, const Mat& pi, const std::vector<Mat>& hs) {
  return std::sqrt(std::max(0.0, quadratic_term(P, pi, hs))) + (pi.array() * P.cost_b.array()).sum();
}

std::vector<Mat> h_step(const Problem& P, const Mat& pi, const std::vector<Mat>& start) {
  std::vector<Mat> out;
  for (std::size_t k = 0; k < start.size(); ++k)
    out.push_back(optimal_metric_coupling(P.a.distance(k), P.b.distance(k), pi, start[k]));
  return out;
}

Mat m_step(const Problem& P, const std::vector<Mat>& hs, const Mat& current, std::size_t sweep) {
  const auto n = static_cast<Eigen::Index>(P.a.points()), m = static_cast<Eigen::Index>(P.b.points());
  Mat a = Mat::Zero(n, m);
  for (std::size_t k = 0; k < hs.size(); ++k) a += P.w[k] * hs[k].cwiseAbs2();
  a /= P.len;
  const Mat& b = P.cost_b;
  const std::vector<double> sa = to_std(P.na.m), sb = to_std(P.nb.m);
  struct Point {
    Mat plan;
    double A, B;
  };
  auto solve = [&](double theta) {
    TransportSolution s = solve_transport(sa, sb, theta * a + b);
    return Point{s.plan, (s.plan.array() * a.array()).sum(), (s.plan.array() * b.array()).sum()};
  };
  auto value = [](const Point& p) { return std::sqrt(std::max(0.0, p.A)) + p.B; };

  Point best{current, (current.array() * a.array()).sum(), (current.array() * b.array()).sum()};
  auto keep = [&](const Point& p) {
    if (value(p) < value(best) - 1e-15) best = p;
  };
  const double theta_mm = best.A > 0 ? 1 / (2 * std::sqrt(best.A)) : 1.0;
  std::vector<Point> sweep_points;
  for (std::size_t j = 0; j < sweep; ++j) {
    const double e = sweep > 1 ? -3.0 + 6.0 * static_cast<double>(j) / static_cast<double>(sweep - 1) : 0.0;
    sweep_points.push_back(solve(theta_mm * std::pow(10.0, e)));
  }
  sweep_points.push_back(solve(theta_mm));
  for (const Point& p : sweep_points) keep(p);
  // Refine between sweep neighbours: the breakpoint weight where two plans tie.
  std::sort(sweep_points.begin(), sweep_points.end(), [](const Point& x, const Point& y) { return x.A > y.A; });
  std::vector<std::pair<Point, Point>> stack;
  for (std::size_t j = 0; j + 1 < sweep_points.size(); ++j) stack.emplace_back(sweep_points[j], sweep_points[j + 1]);
  std::size_t budget = 64;
  while (!stack.empty() && budget-- > 0) {
    auto [p, q] = stack.back();
    stack.pop_back();
    if (p.A - q.A <= 1e-14 || q.B - p.B <= 1e-14) continue;
    const double theta = (q.B - p.B) / (p.A - q.A);
    Point r = solve(theta);
    keep(r);
    const double lp = theta * p.A + p.B, lr = theta * r.A + r.B;
    if (lr < lp - 1e-13 * std::max(1.0, std::abs(lp))) {
      stack.emplace_back(p, r);
      stack.emplace_back(r, q);
    }
  }
  return best.plan;
}

Mat product_coupling(const Vec& m, const Vec& mt) { return m * mt.transpose(); }

}  // namespace

TimedMmInstance::TimedMmInstance(TimeGrid grid, std::vector<Mat> distances, std::vector<Vec> weights, Vec base)
    : grid_(std::move(grid)), d_(std::move(distances)), f_(std::move(weights)), base_(std::move(base)) {
  n_ = static_cast<std::size_t>(base_.size());
  if (n_ == 0) throw InvalidInput("instance has no points");
  if (d_.size() != grid_.size()) throw InvalidInput("need one distance matrix per grid time");
  if (f_.empty()) f_.assign(grid_.size(), Vec::Zero(static_cast<Eigen::Index>(n_)));
  if (f_.size() != grid_.size()) throw InvalidInput("need one weight vector per grid time");
  for (const Mat& d : d_) validate_metric(d, n_);
  for (const Vec& f : f_)
    if (static_cast<std::size_t>(f.size()) != n_ || !f.allFinite()) throw InvalidInput("weights must be finite per point");
  if (!base_.allFinite() || base_.minCoeff() <= 0) throw InvalidInput("base measure must be positive");
}

TimedMmInstance::Normalized TimedMmInstance::normalized(std::optional<double> reference_time) const {
  const double T = reference_time.value_or(0.5 * (grid_.front() + grid_.back()));
  if (T < grid_.front() - 1e-12 || T > grid_.back() + 1e-12) throw InvalidInput("reference time outside the grid");
  Vec fT = f_[0];
  if (grid_.size() > 1) {
    const std::size_t k = std::min(grid_.locate(T), grid_.size() - 2);
    const double s = std::clamp((T - grid_[k]) / (grid_[k + 1] - grid_[k]), 0.0, 1.0);
    fT = (1 - s) * f_[k] + s * f_[k + 1];
  }
  Vec mT = (-fT).array().exp() * base_.array();
  const double Z = mT.sum();
  Normalized out{mT / Z, {}};
  for (const Vec& f : f_) out.f.push_back(f - fT - Vec::Constant(f.size(), std::log(Z)));
  return out;
}

double TimedMmInstance::distance_lipschitz() const {
  double L = 0;
  for (std::size_t k = 0; k + 1 < grid_.size(); ++k)
    L = std::max(L, (d_[k + 1] - d_[k]).cwiseAbs().maxCoeff() / (grid_[k + 1] - grid_[k]));
  return L;
}

bool is_metric_coupling(const Mat& d, const Mat& dt, const Mat& h, double tol, double* worst_violation) {
  if (h.rows() != d.rows() || h.cols() != dt.rows()) throw InvalidInput("coupling matrix has the wrong size");
  const Constraints c = coupling_constraints(d, dt);
  const double worst = std::max(0.0, -(c.A * flatten(h) - c.b).minCoeff());
  if (worst_violation) *worst_violation = worst;
  return worst <= tol;
}

Mat gluing_coupling(const Mat& d, const Mat& dt, std::size_t x0, std::size_t y0, double c) {
  if (x0 >= static_cast<std::size_t>(d.rows()) || y0 >= static_cast<std::size_t>(dt.rows()))
    throw InvalidInput("gluing point out of range");
  if (c < 0) throw InvalidInput("gluing length must be nonnegative");
  Mat h(d.rows(), dt.rows());
  for (Eigen::Index x = 0; x < d.rows(); ++x)
    for (Eigen::Index y = 0; y < dt.rows(); ++y) h(x, y) = d(x, x0) + c + dt(y0, y);
  return h;
}

Mat feasible_metric_coupling(const Mat& d, const Mat& dt) {
  Mat best;
  double best_val = INFINITY;
  for (Eigen::Index x0 = 0; x0 < d.rows(); ++x0)
    for (Eigen::Index y0 = 0; y0 < dt.rows(); ++y0) {
      Mat h = gluing_coupling(d, dt, static_cast<std::size_t>(x0), static_cast<std::size_t>(y0));
      const double v = h.squaredNorm();
      if (v < best_val) {
        best_val = v;
        best = h;
      }
    }
  return best;
}

Mat optimal_metric_coupling(const Mat& d, const Mat& dt, const Mat& weights, const Mat& start) {
  if (weights.rows() != d.rows() || weights.cols() != dt.rows()) throw InvalidInput("weight matrix has the wrong size");
  if (weights.minCoeff() < 0) throw InvalidInput("weights must be nonnegative");
  const Constraints c = coupling_constraints(d, dt);
  const double reg = 1e-9 * std::max(1e-300, weights.maxCoeff());
  const Vec g = 2 * (flatten(weights).array() + reg).matrix();
  const Mat G = g.asDiagonal();
  QpResult r = solve_inequality_qp(G, Vec::Zero(g.size()), c.A, c.b, flatten(start));
  if (!r.converged) throw NumericalFailure("metric coupling QP did not converge");
  return unflatten(r.x, d.rows(), dt.rows());
}

std::string to_string(DdiStatus s) {
  switch (s) {
    case DdiStatus::Converged:
      return "converged";
    case DdiStatus::Stalled:
      return "stalled";
    case DdiStatus::MaxRounds:
      return "max_rounds";
  }
  return "?";
}

namespace {

Problem make_problem(const TimedMmInstance& a, const TimedMmInstance& b, std::optional<double> reference_time) {
  if (a.grid().times() != b.grid().times()) throw InvalidInput("instances must share the time grid");
  Problem P{a, b, a.normalized(reference_time), b.normalized(reference_time), {}, 1.0, {}};
  std::tie(P.w, P.len) = time_weights(a.grid());
  P.cost_b = Mat::Zero(static_cast<Eigen::Index>(a.points()), static_cast<Eigen::Index>(b.points()));
  for (std::size_t k = 0; k < P.w.size(); ++k)
    for (Eigen::Index x = 0; x < P.cost_b.rows(); ++x)
      for (Eigen::Index y = 0; y < P.cost_b.cols(); ++y)
        P.cost_b(x, y) += P.w[k] * std::abs(P.na.f[k](x) - P.nb.f[k](y));
  P.cost_b /= P.len;
  return P;
}

DdiResult finish(const Problem& P, const Mat& pi, const std::vector<Mat>& hs) {
  DdiResult r;
  r.coupling = pi;
  r.metric_couplings = hs;
  r.quadratic_term = quadratic_term(P, pi, hs);
  r.weight_term = (pi.array() * P.cost_b.array()).sum();
  r.value = std::sqrt(std::max(0.0, r.quadratic_term)) + r.weight_term;
  return r;
}

}  // namespace

DdiResult evaluate_ddi(const TimedMmInstance& a, const TimedMmInstance& b, const Mat& coupling,
                       const std::vector<Mat>& metric_couplings, std::optional<double> reference_time) {
  const Problem P = make_problem(a, b, reference_time);
  if (metric_couplings.size() != a.grid().size()) throw InvalidInput("need one metric coupling per grid time");
  return finish(P, coupling, metric_couplings);
}

DdiResult ddi_distance(const TimedMmInstance& a, const TimedMmInstance& b, const DdiOptions& opt) {
  const Problem P = make_problem(a, b, opt.reference_time);
  const std::size_t T = a.grid().size();
  const Eigen::Index n = static_cast<Eigen::Index>(a.points()), m = static_cast<Eigen::Index>(b.points());

  std::vector<Mat> best_single;
  for (std::size_t k = 0; k < T; ++k) best_single.push_back(feasible_metric_coupling(a.distance(k), b.distance(k)));

  struct Start {
    Mat pi;
    std::vector<Mat> hs;
    bool measure_first;  // start with a measure step
  };
  std::vector<Start> starts;
  starts.push_back({product_coupling(P.na.m, P.nb.m), best_single, false});
  for (Eigen::Index x0 = 0; x0 < n; ++x0)
    for (Eigen::Index y0 = 0; y0 < m; ++y0) {
      std::vector<Mat> hs;
      for (std::size_t k = 0; k < T; ++k)
        hs.push_back(gluing_coupling(a.distance(k), b.distance(k), static_cast<std::size_t>(x0),
                                     static_cast<std::size_t>(y0)));
      starts.push_back({product_coupling(P.na.m, P.nb.m), hs, true});
    }
  {
    Mat cost = P.cost_b;
    for (std::size_t k = 0; k < T; ++k)
      for (Eigen::Index x = 0; x < n; ++x)
        for (Eigen::Index y = 0; y < m; ++y)
          cost(x, y) += P.w[k] / P.len *
                        profile_distance(a.distance(k).row(x).transpose(), P.na.m, b.distance(k).row(y).transpose(),
                                         P.nb.m);
    starts.push_back({solve_transport(to_std(P.na.m), to_std(P.nb.m), cost).plan, best_single, false});
  }

  DdiResult best;
  best.value = INFINITY;
  for (Start& s : starts) {
    Mat pi = s.pi;
    std::vector<Mat> hs = s.hs;
    if (s.measure_first) pi = m_step(P, hs, pi, opt.weight_sweep);
    double prev = objective(P, pi, hs);
    DdiStatus status = DdiStatus::MaxRounds;
    std::size_t round = 0;
    Mat keep_pi = pi;
    std::vector<Mat> keep_hs = hs;
    double keep_val = prev;
    for (round = 1; round <= opt.rounds; ++round) {
      hs = h_step(P, pi, hs);
      pi = m_step(P, hs, pi, opt.weight_sweep);
      const double val = objective(P, pi, hs);
      if (val < keep_val) {
        keep_val = val;
        keep_pi = pi;
        keep_hs = hs;
      }
      if (val > prev + opt.tol) {
        status = DdiStatus::Stalled;
        break;
      }
      if (prev - val <= opt.tol) {
        status = DdiStatus::Converged;
        break;
      }
      prev = val;
    }
    if (keep_val < best.value - 1e-15) {
      best = finish(P, keep_pi, keep_hs);
      best.status = status;
      best.rounds = std::min(round, opt.rounds);
    }
  }
  return best;
}

DdiResult static_distance(const Mat& d, const Vec& m, const Mat& dt, const Vec& mt, const DdiOptions& opt) {
  TimeGrid g({0.0});
  TimedMmInstance a(g, {d}, {}, m), b(g, {dt}, {}, mt);
  DdiOptions o = opt;
  o.reference_time = std::nullopt;
  return ddi_distance(a, b, o);
}

SliceBound check_slice_bound(const TimedMmInstance& a, const TimedMmInstance& b, std::size_t s,
                             std::optional<double> lipschitz, const DdiOptions& opt) {
  if (s >= a.grid().size()) throw InvalidInput("slice index out of range");
  SliceBound r;
  r.ddi = ddi_distance(a, b, opt).value;
  r.lipschitz = lipschitz.value_or(std::max(a.distance_lipschitz(), b.distance_lipschitz()));
  const double len = a.grid().span();
  const auto na = a.normalized(opt.reference_time), nb = b.normalized(opt.reference_time);
  r.static_value = static_distance(a.distance(s), na.m, b.distance(s), nb.m, opt).value;
  if (len == 0.0) {
    r.bound = r.ddi;
  } else {
    r.radius = std::cbrt(len) * std::pow(r.ddi, 2.0 / 3.0);
    if (r.radius <= len) {
      r.bound = r.lipschitz * r.radius + r.radius;
    } else {
      r.short_interval = true;
      r.bound = r.lipschitz * len + r.ddi;
    }
  }
  r.holds = r.static_value <= r.bound + 1e-9;
  return r;
}

}  // namespace srf
