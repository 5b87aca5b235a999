#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "srf/error.hpp"
#include "srf/linalg.hpp"
#include "srf/time_grid.hpp"

namespace srf {

/// Generator matrices L_t on n states, one per grid time, linear in between.
class GeneratorFamily {
 public:
  GeneratorFamily(TimeGrid grid, std::vector<Mat> generators, bool markov = true);

  static GeneratorFamily constant(TimeGrid grid, const Mat& L, bool markov = true);
  // L_t = c(t) L0.
  static GeneratorFamily scaled(TimeGrid grid, const Mat& L0, const std::function<double(double)>& c,
                                bool markov = true);

  std::size_t states() const { return n_; }
  const TimeGrid& grid() const { return grid_; }
  bool markov() const { return markov_; }
  const Mat& at(std::size_t k) const { return L_[k]; }
  Mat at_time(double t) const;

 private:
  TimeGrid grid_;
  std::vector<Mat> L_;
  std::size_t n_ = 0;
  bool markov_ = true;
};

// One symmetric matrix per state: Form(u)(x) = u^T A_x u.
using FormField = std::vector<Mat>;

Vec gamma(const Mat& L, const Vec& u, const Vec& v);
Vec gamma2(const Mat& L, const Vec& u, const Vec& v);
// Hessian of f applied to (v, w), state by state.
Vec hessian(const Mat& L, const Vec& f, const Vec& v, const Vec& w);

FormField gamma_form(const Mat& L);
FormField gamma2_form(const Mat& L);
FormField hessian_form(const Mat& L, const Vec& f);

double evaluate(const FormField& A, std::size_t x, const Vec& u);

/// Rows e_y - e_x for every y with L(x,y) != 0: functions with vanishing
/// first differences at x.
Mat neighbour_gradient(const Mat& L, std::size_t x);

// One row e_{fwd} - e_{bwd} per axis of a grid discretization: vanishing central
// differences, which leave the discrete second derivatives free. On a grid this is
// the constraint under which the Ricci form approximates Ric(grad u, grad u).
Mat central_gradient(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& axes);

struct RicciValue {
  double value = 0.0;
  bool unbounded = false;  // value is the unconstrained surrogate, the infimum is -inf
};

// Infimum of Gamma_2(u+v)(x) - (L(u+v)(x))^2 / N over v with G v = 0.
RicciValue ricci_form(const Mat& L, const Vec& u, std::size_t x, const Mat& G, double N = INFINITY);

struct PropagateOptions {
  std::size_t substeps = 0;       // RK4 steps per grid interval; 0 picks from the generator size
  double stiffness_tol = 1e-9;    // step-doubling error bound per interval
  bool backward_check = true;
};

struct PropagatorSlice {
  Mat P;
  double backward_residual = 0.0;  // |d_s P + P L_s| by finite differences
};

// P(s,t) for grid indices s <= t.
PropagatorSlice propagate(const GeneratorFamily& fam, std::size_t s, std::size_t t, const PropagateOptions& opt = {});

// P(s,t) for arbitrary times inside the grid span, `steps` RK4 steps.
Mat propagate_between(const GeneratorFamily& fam, double s, double t, std::size_t steps);

/// All P(s,t), s <= t on the grid.
class PropagatorTable {
 public:
  PropagatorTable(const GeneratorFamily& fam, const PropagateOptions& opt = {});
  const Mat& operator()(std::size_t s, std::size_t t) const;
  std::size_t size() const { return m_; }

 private:
  std::size_t m_ = 0;
  std::vector<Mat> P_;
};

struct GammaVerdict {
  bool holds = true;
  double min_eigenvalue = INFINITY;
  double tolerance = 0.0;
  std::size_t witness_state = 0;
  Vec witness_direction;
  bool first_order = false;  // one-sided time difference at a grid end
};

// Smallest eigenvalue of 2 Gamma_2 - (2/N) (Lu)^2 - d_t Gamma over states at grid index t.
GammaVerdict check_srf_gamma(const GeneratorFamily& fam, std::size_t t, double tol, double N = INFINITY);

struct GradientVerdict {
  bool holds = true;
  double min_slack = INFINITY;
  double tolerance = 0.0;
  std::size_t witness_test = 0;
  std::size_t witness_state = 0;
  double integral_term = 0.0;  // (2/N) integral at the witness, zero for N = inf
};

// P Gamma_s(u) - Gamma_t(P u) >= -tol for each test u.
GradientVerdict check_gradient_estimate(const GeneratorFamily& fam, std::size_t s, std::size_t t,
                                        const std::vector<Vec>& tests, double tol, const PropagatorTable* table = nullptr);

struct NGradientOptions {
  std::size_t panels_per_interval = 4;  // Simpson panels per grid interval
  std::size_t steps_per_interval = 40;  // RK4 steps per grid interval for off-grid propagators
};

// Integral over [s,t] of (P(r,t) L_r P(s,r) u)^2, Simpson rule.
Vec n_gradient_integral(const GeneratorFamily& fam, std::size_t s, std::size_t t, const Vec& u,
                        const NGradientOptions& opt = {});

GradientVerdict check_N_gradient_estimate(const GeneratorFamily& fam, std::size_t s, std::size_t t, double N,
                                          const std::vector<Vec>& tests, double tol, const NGradientOptions& opt = {});

struct GradientWitness {
  Vec u;
  std::size_t s = 0, t = 0, state = 0;
  double slack = 0.0;
};

// Eigenvectors of violated slice forms, tried on grid pairs around the violation.
std::optional<GradientWitness> find_gradient_witness(const GeneratorFamily& fam, double tol,
                                                     const PropagatorTable* table = nullptr);

/// L = L0 - Gamma0(., f).
Mat weighted_generator(const Mat& L0, const Vec& f);

struct WeightedIdentityReport {
  double gamma_residual = 0.0;   // max |Gamma_L(u) - Gamma_0(u)|
  double gamma2_residual = 0.0;  // max |Gamma2_L(u) - Gamma2_0(u) - H f(u,u)|
  bool flagged = false;          // residuals above threshold: not a diffusion discretization
};

// States listed in `states` only (interior points of a discretization).
WeightedIdentityReport check_weighted_identities(const Mat& L0, const Vec& f, const std::vector<Vec>& tests,
                                                 const std::vector<std::size_t>& states, double threshold);

Mat circle_laplacian(std::size_t n, double circumference);
// Reflecting boundary.
Mat interval_laplacian(std::size_t n, double length);

struct MovingQuadraticReport {
  double min_slack = INFINITY;     // Gamma2_0 + H f - d_t Gamma
  double max_residual = 0.0;       // |slack|
};

// Interval discretization with Gamma_t = psi(t) Gamma_0 and weight psi'(t) |x - z(t)|^2 / 2.
MovingQuadraticReport moving_quadratic_check(std::size_t n, double length, double psi, double psi_rate, double z,
                                             const std::vector<Vec>& tests, const std::vector<std::size_t>& states);

}  // namespace srf
