#include "srf/riemann.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace srf {

namespace {

// Fourth-order central difference of a vector-valued map along one direction.
template <class F>
auto central4(F f, double h) -> decltype(f(h)) {
  return (-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12 * h);
}

Mat model_tensor(ModelMetric model, std::size_t dim, const Vec& x) {
  switch (model) {
    case ModelMetric::Flat:
      return Mat::Identity(dim, dim);
    case ModelMetric::Sphere: {
      Mat g = Mat::Identity(2, 2);
      const double s = std::sin(x(0));
      g(1, 1) = s * s;
      return g;
    }
    case ModelMetric::Hyperbolic:
      return Mat::Identity(2, 2) / (x(1) * x(1));
    case ModelMetric::None:
      break;
  }
  throw InvalidInput("no model metric");
}

Mat symmetrize(const Mat& a) { return 0.5 * (a + a.transpose()); }

std::vector<Mat> christoffel_fd(const RiemannianFamily& fam, double t, const Vec& x, double h) {
  const std::size_t n = fam.dim();
  std::vector<Mat> dg(n);  // dg[l] = d_l g
  for (std::size_t l = 0; l < n; ++l) {
    Vec e = Vec::Zero(n);
    e(l) = 1.0;
    dg[l] = central4([&](double s) { return Mat(fam.metric(t, x + s * e)); }, h);
  }
  const Mat ginv = fam.metric(t, x).inverse();
  std::vector<Mat> gam(n, Mat::Zero(n, n));
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double acc = 0;
        for (std::size_t l = 0; l < n; ++l) acc += ginv(k, l) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
        gam[k](i, j) = 0.5 * acc;
      }
  return gam;
}

Mat ricci_from(const std::vector<Mat>& gam, const std::vector<std::vector<Mat>>& dgam, std::size_t n) {
  // dgam[m][k](i,j) = d_m Gamma^k_ij
  Mat R = Mat::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double r = 0;
      for (std::size_t k = 0; k < n; ++k) {
        r += dgam[k][k](i, j) - dgam[j][k](i, k);
        for (std::size_t l = 0; l < n; ++l) r += gam[k](k, l) * gam[l](i, j) - gam[k](j, l) * gam[l](i, k);
      }
      R(i, j) = r;
    }
  return symmetrize(R);
}

Vec gradient_fd(const ScalarField& f, double t, const Vec& x, double h) {
  Vec g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vec e = Vec::Zero(x.size());
    e(i) = 1.0;
    g(i) = central4([&](double s) { return f(t, x + s * e); }, h);
  }
  return g;
}

Mat hessian_fd(const ScalarField& f, double t, const Vec& x, double h) {
  const Eigen::Index n = x.size();
  Mat H(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Vec e = Vec::Zero(n);
    e(i) = 1.0;
    Vec row = central4([&](double s) { return Vec(gradient_fd(f, t, x + s * e, h)); }, h);
    H.row(i) = row.transpose();
  }
  return symmetrize(H);
}

Mat covariant_hessian(const Mat& hess, const Vec& grad, const std::vector<Mat>& gam) {
  Mat H = hess;
  for (std::size_t k = 0; k < gam.size(); ++k) H -= gam[k] * grad(static_cast<Eigen::Index>(k));
  return symmetrize(H);
}

std::pair<Eigen::VectorXd, Mat> generalized_eigen(const Mat& A, const Mat& g) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(symmetrize(A), symmetrize(g));
  if (es.info() != Eigen::Success) throw NumericalFailure("generalized eigenvalue solve failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

}  // namespace

bool Box::contains(const Vec& x, double margin) const {
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (x(i) < lo(i) + margin || x(i) > hi(i) - margin) return false;
  return true;
}

RiemannianFamily::RiemannianFamily(std::size_t dim, Box chart, MetricField metric, ScalarField weight)
    : dim_(dim), chart_(std::move(chart)), metric_(std::move(metric)), weight_(std::move(weight)) {
  if (dim_ == 0 || dim_ > 3) throw InvalidInput("chart dimension must be 1, 2 or 3");
  if (chart_.lo.size() != static_cast<Eigen::Index>(dim_) || chart_.hi.size() != static_cast<Eigen::Index>(dim_))
    throw InvalidInput("chart box does not match the dimension");
  for (std::size_t i = 0; i < dim_; ++i)
    if (!(chart_.lo(i) < chart_.hi(i))) throw InvalidInput("chart box is empty");
  if (!metric_) throw InvalidInput("metric field is required");
}

RiemannianFamily RiemannianFamily::model(ModelMetric model, std::size_t dim, Box chart,
                                         std::function<double(double)> scale,
                                         std::function<double(double)> scale_rate, ScalarField weight) {
  if ((model == ModelMetric::Sphere || model == ModelMetric::Hyperbolic) && dim != 2)
    throw InvalidInput("sphere and hyperbolic models are two-dimensional");
  if (model == ModelMetric::Hyperbolic && !(chart.lo(1) > 0)) throw InvalidInput("half-plane chart needs y > 0");
  if (model == ModelMetric::Sphere && (chart.lo(0) <= 0 || chart.hi(0) >= M_PI))
    throw InvalidInput("sphere chart must avoid the poles");
  MetricField metric = [model, dim, scale](double t, const Vec& x) { return Mat(scale(t) * model_tensor(model, dim, x)); };
  RiemannianFamily f(dim, std::move(chart), metric, std::move(weight));
  f.model_ = model;
  f.scale_ = std::move(scale);
  f.scale_rate_ = std::move(scale_rate);
  return f;
}

RiemannianFamily RiemannianFamily::shrinking_sphere(Box chart) {
  return model(
      ModelMetric::Sphere, 2, std::move(chart), [](double t) { return 1 - 2 * t; }, [](double) { return -2.0; });
}

RiemannianFamily RiemannianFamily::expanding_hyperbolic(Box chart) {
  return model(
      ModelMetric::Hyperbolic, 2, std::move(chart), [](double t) { return 1 + 2 * t; }, [](double) { return 2.0; });
}

RiemannianFamily RiemannianFamily::conformal_euclidean(std::size_t dim, Box chart, double rate) {
  return model(
      ModelMetric::Flat, dim, std::move(chart), [rate](double t) { return std::exp(2 * rate * t); },
      [rate](double t) { return 2 * rate * std::exp(2 * rate * t); });
}

RiemannianFamily RiemannianFamily::flat(std::size_t dim, Box chart, ScalarField weight) {
  return model(
      ModelMetric::Flat, dim, std::move(chart), [](double) { return 1.0; }, [](double) { return 0.0; },
      std::move(weight));
}

Mat RiemannianFamily::metric_rate(double t, const Vec& x) const {
  if (model_ != ModelMetric::None) return scale_rate_(t) * model_tensor(model_, dim_, x);
  return central4([&](double s) { return Mat(metric_(t + s, x)); }, 1e-3);
}

double RiemannianFamily::distance(double t, const Vec& x, const Vec& y) const {
  if (model_ == ModelMetric::None) throw InvalidInput("distance is available for model families only");
  const double c = scale_(t);
  if (!(c > 0)) throw InvalidInput("metric scale is not positive at this time");
  const double r = std::sqrt(c);
  switch (model_) {
    case ModelMetric::Flat:
      return r * (x - y).norm();
    case ModelMetric::Sphere: {
      Eigen::Vector3d u(std::sin(x(0)) * std::cos(x(1)), std::sin(x(0)) * std::sin(x(1)), std::cos(x(0)));
      Eigen::Vector3d v(std::sin(y(0)) * std::cos(y(1)), std::sin(y(0)) * std::sin(y(1)), std::cos(y(0)));
      return r * std::atan2(u.cross(v).norm(), u.dot(v));
    }
    case ModelMetric::Hyperbolic:
      return r * std::acosh(1 + (x - y).squaredNorm() / (2 * x(1) * y(1)));
    case ModelMetric::None:
      break;
  }
  return 0.0;
}

std::optional<std::vector<Mat>> RiemannianFamily::closed_christoffel(const Vec& x) const {
  const std::size_t n = dim_;
  std::vector<Mat> g(n, Mat::Zero(n, n));
  switch (model_) {
    case ModelMetric::Flat:
      return g;
    case ModelMetric::Sphere:
      g[0](1, 1) = -std::sin(x(0)) * std::cos(x(0));
      g[1](0, 1) = g[1](1, 0) = std::cos(x(0)) / std::sin(x(0));
      return g;
    case ModelMetric::Hyperbolic:
      g[0](0, 1) = g[0](1, 0) = -1 / x(1);
      g[1](0, 0) = 1 / x(1);
      g[1](1, 1) = -1 / x(1);
      return g;
    case ModelMetric::None:
      break;
  }
  return std::nullopt;
}

std::optional<Mat> RiemannianFamily::closed_ricci(const Vec& x) const {
  switch (model_) {
    case ModelMetric::Flat:
      return Mat::Zero(dim_, dim_);
    case ModelMetric::Sphere:
      return model_tensor(model_, 2, x);
    case ModelMetric::Hyperbolic:
      return Mat(-model_tensor(model_, 2, x));
    case ModelMetric::None:
      break;
  }
  return std::nullopt;
}

CurvatureOps curvature_ops(const RiemannianFamily& fam, double t, const Vec& x, const CurvatureOptions& opt) {
  const std::size_t n = fam.dim();
  if (x.size() != static_cast<Eigen::Index>(n)) throw InvalidInput("point dimension does not match the chart");
  if (!fam.chart().contains(x, 4 * opt.step)) throw InvalidInput("finite-difference stencil leaves the chart");
  CurvatureOps ops;
  ops.metric = fam.metric(t, x);
  ops.metric_rate = fam.model_metric() != ModelMetric::None
                        ? fam.metric_rate(t, x)
                        : Mat(central4([&](double s) { return Mat(fam.metric(t + s, x)); }, opt.time_step));
  auto closed_g = fam.closed_christoffel(x);
  auto closed_r = fam.closed_ricci(x);
  if (opt.prefer_closed_form && closed_g && closed_r) {
    ops.christoffel = *closed_g;
    ops.ricci = *closed_r;
    ops.closed_form = true;
  } else {
    const double h = opt.step;
    ops.christoffel = christoffel_fd(fam, t, x, h);
    std::vector<std::vector<Mat>> dgam(n);
    for (std::size_t m = 0; m < n; ++m) {
      Vec e = Vec::Zero(n);
      e(m) = 1.0;
      auto at = [&](double s) { return christoffel_fd(fam, t, x + s * e, h); };
      auto p2 = at(2 * h), p1 = at(h), m1 = at(-h), m2 = at(-2 * h);
      dgam[m].resize(n);
      for (std::size_t k = 0; k < n; ++k) dgam[m][k] = (-p2[k] + 8 * p1[k] - 8 * m1[k] + m2[k]) / (12 * h);
    }
    ops.ricci = ricci_from(ops.christoffel, dgam, n);
  }
  ScalarField f = [&fam](double tt, const Vec& y) { return fam.weight(tt, y); };
  if (fam.has_weight()) {
    ops.weight_gradient = gradient_fd(f, t, x, opt.step);
    ops.weight_hessian = covariant_hessian(hessian_fd(f, t, x, opt.step), ops.weight_gradient, ops.christoffel);
  } else {
    ops.weight_gradient = Vec::Zero(n);
    ops.weight_hessian = Mat::Zero(n, n);
  }
  return ops;
}

std::vector<SamplePoint> interior_samples(const RiemannianFamily& fam, const std::vector<double>& times,
                                          std::size_t per_axis, double margin_fraction) {
  if (per_axis == 0) throw InvalidInput("need at least one sample per axis");
  const std::size_t n = fam.dim();
  std::vector<SamplePoint> out;
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= per_axis;
  for (double t : times)
    for (std::size_t idx = 0; idx < total; ++idx) {
      Vec x(n);
      std::size_t rest = idx;
      for (std::size_t i = 0; i < n; ++i) {
        const double lo = fam.chart().lo(i), hi = fam.chart().hi(i), m = margin_fraction * (hi - lo);
        const std::size_t k = rest % per_axis;
        rest /= per_axis;
        x(i) = per_axis == 1 ? 0.5 * (lo + hi)
                             : lo + m + (hi - lo - 2 * m) * static_cast<double>(k) / static_cast<double>(per_axis - 1);
      }
      out.push_back({t, x});
    }
  return out;
}

namespace {

template <class FormFn>
TensorVerdict eigen_scan(const RiemannianFamily& fam, const std::vector<SamplePoint>& samples, double tol,
                         const CurvatureOptions& opt, bool lower, FormFn form) {
  TensorVerdict v;
  v.tolerance = tol;
  double worst = INFINITY;
  for (const auto& s : samples) {
    auto ops = curvature_ops(fam, s.t, s.x, opt);
    Mat A = form(ops, s);
    auto [vals, vecs] = generalized_eigen(A, ops.metric);
    TensorSample ts{s.t, s.x, vals.minCoeff(), vals.maxCoeff()};
    v.samples.push_back(ts);
    v.min_eigenvalue = std::min(v.min_eigenvalue, ts.min_eigenvalue);
    v.max_eigenvalue = std::max(v.max_eigenvalue, ts.max_eigenvalue);
    const double slack = lower ? ts.min_eigenvalue : -ts.max_eigenvalue;
    if (slack < worst) {
      worst = slack;
      v.witness = ts;
      Eigen::Index idx;
      if (lower) vals.minCoeff(&idx);
      else vals.maxCoeff(&idx);
      v.witness_direction = vecs.col(idx);
    }
  }
  v.holds = worst >= -tol;
  return v;
}

}  // namespace

TensorVerdict check_srf_tensor(const RiemannianFamily& fam, const std::vector<SamplePoint>& samples, double tol,
                               const CurvatureOptions& opt) {
  return eigen_scan(fam, samples, tol, opt, true, [](const CurvatureOps& o, const SamplePoint&) {
    return Mat(o.ricci + o.weight_hessian + 0.5 * o.metric_rate);
  });
}

TensorVerdict check_sub_rf_tensor(const RiemannianFamily& fam, const std::vector<SamplePoint>& samples, double tol,
                                  const CurvatureOptions& opt) {
  return eigen_scan(fam, samples, tol, opt, false, [](const CurvatureOps& o, const SamplePoint&) {
    return Mat(o.ricci + o.weight_hessian + 0.5 * o.metric_rate);
  });
}

TensorVerdict check_N_srf_tensor(const RiemannianFamily& fam, double N, const std::vector<SamplePoint>& samples,
                                 double tol, const CurvatureOptions& opt) {
  const double n = static_cast<double>(fam.dim());
  if (!(N >= n)) throw InvalidInput("N must be at least the dimension");
  if (N == n) {
    // Only constant weights are admissible; report the largest gradient norm.
    for (const auto& s : samples) {
      auto ops = curvature_ops(fam, s.t, s.x, opt);
      const double norm = std::sqrt(ops.weight_gradient.dot(ops.metric.ldlt().solve(ops.weight_gradient)));
      if (norm > tol) {
        TensorVerdict v;
        v.tolerance = tol;
        v.holds = false;
        v.note = "weight not constant";
        v.witness = TensorSample{s.t, s.x, -norm, -norm};
        v.witness_direction = ops.weight_gradient;
        v.min_eigenvalue = -norm;
        return v;
      }
    }
    return check_srf_tensor(fam, samples, tol, opt);
  }
  const double inv = std::isinf(N) ? 0.0 : 1.0 / (N - n);
  return eigen_scan(fam, samples, tol, opt, true, [inv](const CurvatureOps& o, const SamplePoint&) {
    return Mat(o.ricci + o.weight_hessian - inv * o.weight_gradient * o.weight_gradient.transpose() +
               0.5 * o.metric_rate);
  });
}

TensorVerdict check_backward_convexity(const RiemannianFamily& fam, const ScalarField& V,
                                       const std::vector<SamplePoint>& samples, double tol,
                                       const CurvatureOptions& opt) {
  return eigen_scan(fam, samples, tol, opt, true, [&](const CurvatureOps& o, const SamplePoint& s) {
    Vec grad = gradient_fd(V, s.t, s.x, opt.step);
    Mat hess = covariant_hessian(hessian_fd(V, s.t, s.x, opt.step), grad, o.christoffel);
    return Mat(hess - 0.5 * o.metric_rate);
  });
}

IdentityReport check_weight_identity(const RiemannianFamily& fam, double t_ref, const std::vector<SamplePoint>& samples,
                                     double tol, const CurvatureOptions& opt) {
  IdentityReport r;
  r.tolerance = tol;
  for (const auto& s : samples) {
    const double logdet_ref = std::log(fam.metric(t_ref, s.x).determinant());
    auto fhat = [&](double dt) { return -0.5 * (std::log(fam.metric(s.t + dt, s.x).determinant()) - logdet_ref); };
    const double lhs = central4(fhat, opt.time_step);
    const Mat g = fam.metric(s.t, s.x);
    const Mat rate = fam.model_metric() != ModelMetric::None
                         ? fam.metric_rate(s.t, s.x)
                         : Mat(central4([&](double dt) { return Mat(fam.metric(s.t + dt, s.x)); }, opt.time_step));
    const double rhs = -0.5 * g.ldlt().solve(rate).trace();
    const double res = std::abs(lhs - rhs);
    r.residuals.push_back({s, res});
    r.max_residual = std::max(r.max_residual, res);
  }
  r.holds = r.max_residual <= tol;
  return r;
}

Trajectory gradient_flow(const RiemannianFamily& fam, const ScalarField& V, const TimeGrid& grid, const Vec& x_T,
                         std::size_t substeps, double fd_step) {
  if (x_T.size() != static_cast<Eigen::Index>(fam.dim())) throw InvalidInput("terminal point dimension mismatch");
  if (!fam.chart().contains(x_T)) throw InvalidInput("terminal point lies outside the chart");
  if (substeps == 0) throw InvalidInput("need at least one substep");
  auto velocity = [&](double t, const Vec& x) -> Vec {
    return fam.metric(t, x).ldlt().solve(gradient_fd(V, t, x, fd_step));
  };
  const std::size_t M = grid.size();
  std::vector<Vec> pts(M);
  pts[M - 1] = x_T;
  Trajectory tr;
  std::size_t first = M - 1;
  Vec x = x_T;
  for (std::size_t k = M - 1; k > 0; --k) {
    const double h = (grid[k - 1] - grid[k]) / static_cast<double>(substeps);
    double t = grid[k];
    bool left_chart = false;
    for (std::size_t j = 0; j < substeps; ++j) {
      Vec k1 = velocity(t, x);
      Vec k2 = velocity(t + h / 2, x + h / 2 * k1);
      Vec k3 = velocity(t + h / 2, x + h / 2 * k2);
      Vec k4 = velocity(t + h, x + h * k3);
      x += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
      t += h;
      if (!x.allFinite() || !fam.chart().contains(x)) {
        left_chart = true;
        break;
      }
    }
    if (left_chart) {
      tr.truncated = true;
      break;
    }
    pts[k - 1] = x;
    first = k - 1;
  }
  tr.first_valid = first;
  for (std::size_t k = first; k < M; ++k) {
    tr.times.push_back(grid[k]);
    tr.points.push_back(pts[k]);
  }
  return tr;
}

MonotonicityVerdict check_distance_expansion(const RiemannianFamily& fam, const Trajectory& a, const Trajectory& b,
                                             double tol) {
  MonotonicityVerdict v;
  v.tolerance = tol;
  // Align on common times (both trajectories end on the same grid).
  const std::size_t n = std::min(a.times.size(), b.times.size());
  const std::size_t oa = a.times.size() - n, ob = b.times.size() - n;
  for (std::size_t k = 0; k < n; ++k) {
    if (std::abs(a.times[oa + k] - b.times[ob + k]) > 1e-12) throw InvalidInput("trajectories use different time grids");
    v.distances.push_back(fam.distance(a.times[oa + k], a.points[oa + k], b.points[ob + k]));
  }
  for (std::size_t k = 0; k + 1 < v.distances.size(); ++k) {
    const double inc = v.distances[k + 1] - v.distances[k];
    if (inc < v.min_increment) {
      v.min_increment = inc;
      v.witness = k;
    }
  }
  v.holds = v.min_increment >= -tol;
  return v;
}

ChartEviModel::ChartEviModel(const RiemannianFamily& fam, ScalarField V, TimeGrid grid)
    : fam_(fam), V_(std::move(V)), grid_(std::move(grid)) {
  if (fam_.model_metric() != ModelMetric::Flat) throw InvalidInput("chart geodesics are available for flat models only");
}

std::vector<Vec> ChartEviModel::geodesic(std::size_t, const Point& a, const Point& b, std::size_t n) const {
  std::vector<Vec> out;
  for (std::size_t j = 0; j <= n; ++j) out.push_back(a + (static_cast<double>(j) / static_cast<double>(n)) * (b - a));
  return out;
}

}  // namespace srf
