#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "srf/error.hpp"
#include "srf/linalg.hpp"
#include "srf/time_grid.hpp"

namespace srf {

/// Finite time-dependent mm-space: metrics d_t and weights f_t on a grid,
/// with measures m_t = e^{-f_t} base.
class TimedMmInstance {
 public:
  // An empty weight list means f = 0.
  TimedMmInstance(TimeGrid grid, std::vector<Mat> distances, std::vector<Vec> weights, Vec base);

  std::size_t points() const { return n_; }
  const TimeGrid& grid() const { return grid_; }
  const Mat& distance(std::size_t k) const { return d_[k]; }
  const Vec& weight(std::size_t k) const { return f_[k]; }
  const Vec& base() const { return base_; }

  struct Normalized {
    Vec m;               // probability m_T / m_T(X)
    std::vector<Vec> f;  // weights relative to m
  };
  // Reference time defaults to the midpoint of the grid span.
  Normalized normalized(std::optional<double> reference_time = std::nullopt) const;

  // max |d_{k+1} - d_k| / (t_{k+1} - t_k)
  double distance_lipschitz() const;

 private:
  TimeGrid grid_;
  std::vector<Mat> d_;
  std::vector<Vec> f_;
  Vec base_;
  std::size_t n_ = 0;
};

// Mixed triangle inequalities and nonnegativity for a cross matrix h(x,y).
bool is_metric_coupling(const Mat& d, const Mat& d_tilde, const Mat& h, double tol = 1e-9,
                        double* worst_violation = nullptr);

// h(x,y) = d(x,x0) + c + d~(y0,y).
Mat gluing_coupling(const Mat& d, const Mat& d_tilde, std::size_t x0, std::size_t y0, double c = 0.0);

// Best single cross-edge gluing under uniform weights.
Mat feasible_metric_coupling(const Mat& d, const Mat& d_tilde);

// Minimizes sum w(x,y) h(x,y)^2 over metric couplings, starting from a feasible h.
Mat optimal_metric_coupling(const Mat& d, const Mat& d_tilde, const Mat& weights, const Mat& start);

enum class DdiStatus { Converged, Stalled, MaxRounds };
std::string to_string(DdiStatus s);

struct DdiOptions {
  std::size_t rounds = 30;
  double tol = 1e-10;
  std::size_t weight_sweep = 16;  // log-spaced scalarization weights per measure step
  std::optional<double> reference_time;
};

struct DdiResult {
  double value = 0.0;  // sqrt(quadratic_term) + weight_term
  double quadratic_term = 0.0;
  double weight_term = 0.0;
  Mat coupling;                       // measure coupling
  std::vector<Mat> metric_couplings;  // one per grid time
  DdiStatus status = DdiStatus::Converged;
  std::size_t rounds = 0;
  bool upper_bound = true;  // feasible point, no optimality certificate
};

// Objective value for given couplings.
DdiResult evaluate_ddi(const TimedMmInstance& a, const TimedMmInstance& b, const Mat& coupling,
                       const std::vector<Mat>& metric_couplings, std::optional<double> reference_time = std::nullopt);

DdiResult ddi_distance(const TimedMmInstance& a, const TimedMmInstance& b, const DdiOptions& opt = {});

// Static distance inf (sum h^2 dm)^{1/2}; an upper bound like ddi_distance.
DdiResult static_distance(const Mat& d, const Vec& m, const Mat& d_tilde, const Vec& m_tilde,
                          const DdiOptions& opt = {});

struct SliceBound {
  double ddi = 0.0;
  double static_value = 0.0;
  double lipschitz = 0.0;  // linear modulus of continuity of the metrics in time
  double radius = 0.0;     // |I|^{1/3} ddi^{2/3}
  double bound = 0.0;
  bool short_interval = false;  // radius exceeds |I|; the whole interval is used instead
  bool holds = true;
};

SliceBound check_slice_bound(const TimedMmInstance& a, const TimedMmInstance& b, std::size_t s,
                             std::optional<double> lipschitz = std::nullopt, const DdiOptions& opt = {});

}  // namespace srf
