#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "srf/error.hpp"
#include "srf/linalg.hpp"
#include "srf/time_grid.hpp"

namespace srf {

using ScalarField = std::function<double(double t, const Vec& x)>;

/// Axis-aligned coordinate box.
struct Box {
  Vec lo, hi;
  bool contains(const Vec& x, double margin = 0.0) const;
};

// Known base metrics; a model family is g_t = c(t) * g_model.
enum class ModelMetric { None, Flat, Sphere, Hyperbolic };

/// Smooth family of metrics g_t on a chart of dimension at most 3, with a weight function.
class RiemannianFamily {
 public:
  using MetricField = std::function<Mat(double t, const Vec& x)>;

  RiemannianFamily(std::size_t dim, Box chart, MetricField metric, ScalarField weight = nullptr);

  // c(t) g_model with its derivative c'(t); the closed forms below become available.
  static RiemannianFamily model(ModelMetric model, std::size_t dim, Box chart, std::function<double(double)> scale,
                                std::function<double(double)> scale_rate, ScalarField weight = nullptr);
  // (1 - 2t) times the round metric of S^2 in polar/azimuthal coordinates.
  static RiemannianFamily shrinking_sphere(Box chart);
  // (1 + 2t) times the upper half-plane metric.
  static RiemannianFamily expanding_hyperbolic(Box chart);
  // e^{2 rate t} times the Euclidean metric.
  static RiemannianFamily conformal_euclidean(std::size_t dim, Box chart, double rate);
  static RiemannianFamily flat(std::size_t dim, Box chart, ScalarField weight = nullptr);

  std::size_t dim() const { return dim_; }
  const Box& chart() const { return chart_; }
  ModelMetric model_metric() const { return model_; }
  bool has_weight() const { return static_cast<bool>(weight_); }

  Mat metric(double t, const Vec& x) const { return metric_(t, x); }
  Mat metric_rate(double t, const Vec& x) const;  // d/dt g_t
  double weight(double t, const Vec& x) const { return weight_ ? weight_(t, x) : 0.0; }

  void set_weight(ScalarField w) { weight_ = std::move(w); }

  // Geodesic distance; closed form for model families only.
  double distance(double t, const Vec& x, const Vec& y) const;

  // Closed forms (model families only; otherwise empty).
  std::optional<std::vector<Mat>> closed_christoffel(const Vec& x) const;
  std::optional<Mat> closed_ricci(const Vec& x) const;

 private:
  std::size_t dim_;
  Box chart_;
  MetricField metric_;
  ScalarField weight_;
  ModelMetric model_ = ModelMetric::None;
  std::function<double(double)> scale_, scale_rate_;
};

struct CurvatureOps {
  Mat metric;
  Mat metric_rate;
  std::vector<Mat> christoffel;  // christoffel[k](i, j) = Gamma^k_ij
  Mat ricci;
  Vec weight_gradient;
  Mat weight_hessian;  // covariant Hessian
  bool closed_form = false;
};

struct CurvatureOptions {
  double step = 1e-3;           // spatial finite-difference step (fourth-order stencils)
  double time_step = 1e-3;      // time finite-difference step
  bool prefer_closed_form = true;
};

CurvatureOps curvature_ops(const RiemannianFamily& fam, double t, const Vec& x, const CurvatureOptions& opt = {});

struct TensorSample {
  double t = 0.0;
  Vec x;
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
};

struct TensorVerdict {
  bool holds = true;
  double min_eigenvalue = INFINITY;  // over all samples
  double max_eigenvalue = -INFINITY;
  double tolerance = 0.0;
  std::vector<TensorSample> samples;
  std::optional<TensorSample> witness;
  Vec witness_direction;
  std::string note;
};

struct SamplePoint {
  double t;
  Vec x;
};

// Tensor-product grid of interior chart points (per_axis per coordinate) at the given times.
std::vector<SamplePoint> interior_samples(const RiemannianFamily& fam, const std::vector<double>& times,
                                          std::size_t per_axis, double margin_fraction = 0.05);

// Ric + Hess f + 1/2 dg/dt >= 0 (generalized eigenvalues w.r.t. g_t).
TensorVerdict check_srf_tensor(const RiemannianFamily& fam, const std::vector<SamplePoint>& samples, double tol,
                               const CurvatureOptions& opt = {});
// Ric + Hess f + 1/2 dg/dt <= 0.
TensorVerdict check_sub_rf_tensor(const RiemannianFamily& fam, const std::vector<SamplePoint>& samples, double tol,
                                  const CurvatureOptions& opt = {});
// Ric + Hess f - df (x) df / (N - n) + 1/2 dg/dt >= 0; N = n requires df = 0.
TensorVerdict check_N_srf_tensor(const RiemannianFamily& fam, double N, const std::vector<SamplePoint>& samples,
                                 double tol, const CurvatureOptions& opt = {});
// Backward dynamic convexity of V: Hess V >= 1/2 dg/dt.
TensorVerdict check_backward_convexity(const RiemannianFamily& fam, const ScalarField& V,
                                       const std::vector<SamplePoint>& samples, double tol,
                                       const CurvatureOptions& opt = {});

struct IdentityReport {
  bool holds = true;
  double max_residual = 0.0;
  double tolerance = 0.0;
  std::vector<std::pair<SamplePoint, double>> residuals;
};

// d/dt fhat = -1/2 tr(g^{-1} dg/dt) with fhat = -1/2 log det(g_t g_ref^{-1}).
IdentityReport check_weight_identity(const RiemannianFamily& fam, double t_ref, const std::vector<SamplePoint>& samples,
                                     double tol, const CurvatureOptions& opt = {});

struct Trajectory {
  std::vector<double> times;
  std::vector<Vec> points;
  bool truncated = false;        // left the chart; earlier times are missing
  std::size_t first_valid = 0;   // index into the requested grid of the earliest point kept
};

// Upward gradient flow dx/dt = g_t^{-1} grad V_t, integrated backward from (T, x_T)
// with classical Runge-Kutta; output on every grid time <= T.
Trajectory gradient_flow(const RiemannianFamily& fam, const ScalarField& V, const TimeGrid& grid, const Vec& x_T,
                         std::size_t substeps = 20, double fd_step = 1e-5);

struct MonotonicityVerdict {
  bool holds = true;
  double min_increment = INFINITY;
  double tolerance = 0.0;
  std::vector<double> distances;
  std::size_t witness = 0;  // index k with d_{k+1} - d_k minimal
};

// d_t(x_t, y_t) nondecreasing in t.
MonotonicityVerdict check_distance_expansion(const RiemannianFamily& fam, const Trajectory& a, const Trajectory& b,
                                             double tol);

/// EVI adapter for a chart family whose geodesics are straight coordinate lines.
class ChartEviModel {
 public:
  using Point = Vec;
  ChartEviModel(const RiemannianFamily& fam, ScalarField V, TimeGrid grid);
  const TimeGrid& grid() const { return grid_; }
  double distance(std::size_t k, const Point& a, const Point& b) const { return fam_.distance(grid_[k], a, b); }
  double potential(std::size_t k, const Point& a) const { return V_(grid_[k], a); }
  std::vector<Point> geodesic(std::size_t k, const Point& a, const Point& b, std::size_t n) const;

 private:
  const RiemannianFamily& fam_;
  ScalarField V_;
  TimeGrid grid_;
};

}  // namespace srf
