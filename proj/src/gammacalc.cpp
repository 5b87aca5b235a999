#include "srf/gammacalc.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

namespace srf {

GeneratorFamily::GeneratorFamily(TimeGrid grid, std::vector<Mat> generators, bool markov)
    : grid_(std::move(grid)), L_(std::move(generators)), markov_(markov) {
  if (L_.size() != grid_.size()) throw InvalidInput("need one generator per grid time");
  n_ = static_cast<std::size_t>(L_.front().rows());
  if (n_ == 0) throw InvalidInput("generator has no states");
  for (const Mat& L : L_) {
    if (static_cast<std::size_t>(L.rows()) != n_ || static_cast<std::size_t>(L.cols()) != n_)
      throw InvalidInput("generators must be square and of equal size");
    if (!L.allFinite()) throw InvalidInput("generator has non-finite entries");
    const double scale = std::max(1.0, L.cwiseAbs().maxCoeff());
    for (std::size_t x = 0; x < n_; ++x) {
      if (std::abs(L.row(x).sum()) > 1e-12 * scale) throw InvalidInput("generator rows must sum to zero");
      if (markov_)
        for (std::size_t y = 0; y < n_; ++y)
          if (y != x && L(x, y) < 0) throw InvalidInput("markov generator has a negative off-diagonal entry");
    }
  }
}

GeneratorFamily GeneratorFamily::constant(TimeGrid grid, const Mat& L, bool markov) {
  std::vector<Mat> Ls(grid.size(), L);
  return GeneratorFamily(std::move(grid), std::move(Ls), markov);
}

GeneratorFamily GeneratorFamily::scaled(TimeGrid grid, const Mat& L0, const std::function<double(double)>& c,
                                        bool markov) {
  std::vector<Mat> Ls;
  for (double t : grid.times()) {
    const double ct = c(t);
    if (markov && ct < 0) throw InvalidInput("negative scale breaks the markov property");
    Ls.push_back(ct * L0);
  }
  return GeneratorFamily(std::move(grid), std::move(Ls), markov);
}

Mat GeneratorFamily::at_time(double t) const {
  if (t < grid_.front() - 1e-12 || t > grid_.back() + 1e-12) throw InvalidInput("time outside the generator grid");
  if (grid_.size() == 1) return L_[0];
  std::size_t k = std::min(grid_.locate(t), grid_.size() - 2);
  const double a = (t - grid_[k]) / (grid_[k + 1] - grid_[k]);
  return (1 - a) * L_[k] + a * L_[k + 1];
}

Vec gamma(const Mat& L, const Vec& u, const Vec& v) {
  return 0.5 * (L * u.cwiseProduct(v) - u.cwiseProduct(L * v) - v.cwiseProduct(L * u));
}

Vec gamma2(const Mat& L, const Vec& u, const Vec& v) {
  return 0.5 * (L * gamma(L, u, v) - gamma(L, u, L * v) - gamma(L, v, L * u));
}

Vec hessian(const Mat& L, const Vec& f, const Vec& v, const Vec& w) {
  return 0.5 * (gamma(L, v, gamma(L, w, f)) + gamma(L, w, gamma(L, v, f)) - gamma(L, f, gamma(L, v, w)));
}

namespace {

template <class Bilinear>
FormField form_from(std::size_t n, Bilinear b) {
  FormField A(n, Mat::Zero(n, n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      const Vec val = b(Vec::Unit(n, i), Vec::Unit(n, j));
      for (std::size_t x = 0; x < n; ++x) A[x](i, j) = A[x](j, i) = val(x);
    }
  return A;
}

double min_eigen(const Mat& A, Vec* vec = nullptr) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (A + A.transpose()));
  if (vec) *vec = es.eigenvectors().col(0);
  return es.eigenvalues()(0);
}

}  // namespace

FormField gamma_form(const Mat& L) {
  const std::size_t n = static_cast<std::size_t>(L.rows());
  FormField A(n, Mat::Zero(n, n));
  for (std::size_t x = 0; x < n; ++x) {
    Mat& a = A[x];
    for (std::size_t i = 0; i < n; ++i) {
      a(i, i) += 0.5 * L(x, i);
      a(x, i) -= 0.5 * L(x, i);
      a(i, x) -= 0.5 * L(x, i);
    }
  }
  return A;
}

FormField gamma2_form(const Mat& L) {
  return form_from(static_cast<std::size_t>(L.rows()), [&](const Vec& u, const Vec& v) { return gamma2(L, u, v); });
}

FormField hessian_form(const Mat& L, const Vec& f) {
  return form_from(static_cast<std::size_t>(L.rows()),
                   [&](const Vec& u, const Vec& v) { return hessian(L, f, u, v); });
}

double evaluate(const FormField& A, std::size_t x, const Vec& u) { return u.dot(A[x] * u); }

Mat neighbour_gradient(const Mat& L, std::size_t x) {
  const std::size_t n = static_cast<std::size_t>(L.rows());
  std::vector<std::size_t> nb;
  for (std::size_t y = 0; y < n; ++y)
    if (y != x && L(x, y) != 0.0) nb.push_back(y);
  Mat G = Mat::Zero(static_cast<Eigen::Index>(nb.size()), static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < nb.size(); ++r) {
    G(r, nb[r]) = 1.0;
    G(r, x) = -1.0;
  }
  return G;
}

Mat central_gradient(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& axes) {
  Mat G = Mat::Zero(static_cast<Eigen::Index>(axes.size()), static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < axes.size(); ++r) {
    const auto [fwd, bwd] = axes[r];
    if (fwd >= n || bwd >= n || fwd == bwd) throw InvalidInput("central difference needs two distinct states");
    G(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(fwd)) = 1.0;
    G(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(bwd)) = -1.0;
  }
  return G;
}

RicciValue ricci_form(const Mat& L, const Vec& u, std::size_t x, const Mat& G, double N) {
  if (!(N > 0)) throw InvalidInput("N must be positive");
  const Eigen::Index n = L.rows();
  if (G.cols() != n) throw InvalidInput("gradient constraint has the wrong width");
  Mat M = gamma2_form(L)[x];
  if (!std::isinf(N)) M -= L.row(x).transpose() * L.row(x) / N;
  const double base = u.dot(M * u);
  Mat Z;
  if (G.rows() == 0) {
    Z = Mat::Identity(n, n);
  } else {
    Eigen::FullPivLU<Mat> lu(G);
    if (lu.rank() == n) return {base, false};
    Z = lu.kernel();
  }
  const Mat H = Z.transpose() * M * Z;
  const Vec b = Z.transpose() * M * u;
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (H + H.transpose()));
  const double eps = 1e-10 * std::max(1.0, M.cwiseAbs().maxCoeff());
  const Vec lam = es.eigenvalues();
  const Vec bc = es.eigenvectors().transpose() * b;
  double value = base;
  for (Eigen::Index k = 0; k < lam.size(); ++k) {
    if (lam(k) < -eps) return {base, true};
    if (lam(k) <= eps) {
      if (std::abs(bc(k)) > std::sqrt(eps) * std::max(1.0, b.norm())) return {base, true};
      continue;
    }
    value -= bc(k) * bc(k) / lam(k);
  }
  return {value, false};
}

namespace {

Mat rk4_step(const GeneratorFamily& fam, double r, double h, const Mat& P) {
  const Mat L0 = fam.at_time(r), Lm = fam.at_time(r + h / 2), L1 = fam.at_time(r + h);
  const Mat k1 = L0 * P;
  const Mat k2 = Lm * (P + h / 2 * k1);
  const Mat k3 = Lm * (P + h / 2 * k2);
  const Mat k4 = L1 * (P + h * k3);
  return P + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
}

// Propagator over [a,b] inside one grid interval.
Mat integrate_piece(const GeneratorFamily& fam, double a, double b, std::size_t steps) {
  Mat P = Mat::Identity(fam.states(), fam.states());
  const double h = (b - a) / static_cast<double>(steps);
  for (std::size_t j = 0; j < steps; ++j) P = rk4_step(fam, a + h * static_cast<double>(j), h, P);
  return P;
}

// Explicit count, or one scaled to the Gershgorin bound of the generators on the interval.
std::size_t substeps_for(const GeneratorFamily& fam, std::size_t k, const PropagateOptions& opt) {
  if (opt.substeps > 0) return opt.substeps;
  const double rho = 2 * std::max(fam.at(k).diagonal().cwiseAbs().maxCoeff(),
                                  fam.at(k + 1).diagonal().cwiseAbs().maxCoeff());
  const double span = fam.grid()[k + 1] - fam.grid()[k];
  return std::max<std::size_t>(20, static_cast<std::size_t>(std::ceil(30 * span * rho)));
}

// With automatic substeps the count doubles until the step-doubling error estimate
// meets the stiffness tolerance; an explicit count gets one attempt.
Mat interval_propagator(const GeneratorFamily& fam, std::size_t k, const PropagateOptions& opt) {
  std::size_t steps = substeps_for(fam, k, opt);
  const double a = fam.grid()[k], b = fam.grid()[k + 1];
  const int attempts = opt.substeps > 0 ? 1 : 12;
  double err = INFINITY;
  for (int i = 0; i < attempts; ++i, steps *= 2) {
    const Mat coarse = integrate_piece(fam, a, b, steps);
    const Mat fine = integrate_piece(fam, a, b, 2 * steps);
    err = fine.allFinite() ? (coarse - fine).cwiseAbs().rowwise().sum().maxCoeff() * 16.0 / 15.0 : INFINITY;
    if (err <= opt.stiffness_tol) return fine;
  }
  steps /= 2;
  const double factor = std::isfinite(err) ? std::pow(err / opt.stiffness_tol, 0.25) : 16.0;
  const auto suggest = static_cast<std::size_t>(std::ceil(static_cast<double>(steps) * 2 * factor));
  throw NumericalFailure("step too large for stiffness on [" + std::to_string(a) + ", " + std::to_string(b) +
                         "]; use at least " + std::to_string(suggest) + " substeps");
}

}  // namespace

Mat propagate_between(const GeneratorFamily& fam, double s, double t, std::size_t steps) {
  if (s > t) throw InvalidInput("propagator needs s <= t");
  if (steps == 0) throw InvalidInput("need at least one step");
  const TimeGrid& g = fam.grid();
  if (s < g.front() - 1e-12 || t > g.back() + 1e-12) throw InvalidInput("time outside the generator grid");
  Mat P = Mat::Identity(fam.states(), fam.states());
  double a = s;
  while (a < t) {
    std::size_t k = std::min(g.locate(a), g.size() >= 2 ? g.size() - 2 : 0);
    double b = g.size() >= 2 ? std::min(t, g[k + 1]) : t;
    if (b <= a) b = t;  // a sits on the last node up to rounding
    const double frac = g.size() >= 2 ? (b - a) / (g[k + 1] - g[k]) : 1.0;
    const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(frac * static_cast<double>(steps))));
    P = integrate_piece(fam, a, b, n) * P;
    a = b;
  }
  return P;
}

PropagatorSlice propagate(const GeneratorFamily& fam, std::size_t s, std::size_t t, const PropagateOptions& opt) {
  if (s > t || t >= fam.grid().size()) throw InvalidInput("propagator needs grid indices s <= t");
  PropagatorSlice out;
  out.P = Mat::Identity(fam.states(), fam.states());
  for (std::size_t k = s; k < t; ++k) out.P = interval_propagator(fam, k, opt) * out.P;
  if (opt.backward_check && s < t) {
    const TimeGrid& g = fam.grid();
    const double ts = g[s], tt = g[t], d = 1e-3 * (g[s + 1] - g[s]);
    std::size_t steps = 0;
    for (std::size_t k = s; k < t; ++k) steps = std::max(steps, 4 * substeps_for(fam, k, opt));
    const Mat Ls = fam.at(s);
    Mat dP;
    if (s > 0) {
      dP = (propagate_between(fam, ts + d, tt, steps) - propagate_between(fam, ts - d, tt, steps)) / (2 * d);
    } else {
      const Mat P0 = propagate_between(fam, ts, tt, steps);
      dP = (-3 * P0 + 4 * propagate_between(fam, ts + d, tt, steps) - propagate_between(fam, ts + 2 * d, tt, steps)) /
           (2 * d);
    }
    out.backward_residual = (dP + out.P * Ls).cwiseAbs().maxCoeff();
  }
  return out;
}

PropagatorTable::PropagatorTable(const GeneratorFamily& fam, const PropagateOptions& opt) : m_(fam.grid().size()) {
  std::vector<Mat> Q;
  for (std::size_t k = 0; k + 1 < m_; ++k) Q.push_back(interval_propagator(fam, k, opt));
  P_.resize(m_ * m_);
  for (std::size_t s = 0; s < m_; ++s) {
    P_[s * m_ + s] = Mat::Identity(fam.states(), fam.states());
    for (std::size_t t = s + 1; t < m_; ++t) P_[s * m_ + t] = Q[t - 1] * P_[s * m_ + t - 1];
  }
}

const Mat& PropagatorTable::operator()(std::size_t s, std::size_t t) const {
  if (s > t || t >= m_) throw InvalidInput("propagator needs grid indices s <= t");
  return P_[s * m_ + t];
}

GammaVerdict check_srf_gamma(const GeneratorFamily& fam, std::size_t t, double tol, double N) {
  const TimeGrid& g = fam.grid();
  if (g.size() < 2) throw InvalidInput("time derivative needs two grid times");
  if (t >= g.size()) throw InvalidInput("grid index out of range");
  if (!(N > 0)) throw InvalidInput("N must be positive");
  GammaVerdict v;
  v.tolerance = tol;
  Mat Ldot;
  if (t == 0) {
    Ldot = (fam.at(1) - fam.at(0)) / (g[1] - g[0]);
    v.first_order = true;
  } else if (t + 1 == g.size()) {
    Ldot = (fam.at(t) - fam.at(t - 1)) / (g[t] - g[t - 1]);
    v.first_order = true;
  } else {
    Ldot = (fam.at(t + 1) - fam.at(t - 1)) / (g[t + 1] - g[t - 1]);
  }
  const Mat& L = fam.at(t);
  const FormField Adot = gamma_form(Ldot);
  const FormField B = gamma2_form(L);
  for (std::size_t x = 0; x < fam.states(); ++x) {
    Mat F = 2 * B[x] - Adot[x];
    if (!std::isinf(N)) F -= (2 / N) * L.row(x).transpose() * L.row(x);
    Vec dir;
    const double lam = min_eigen(F, &dir);
    if (lam < v.min_eigenvalue) {
      v.min_eigenvalue = lam;
      v.witness_state = x;
      v.witness_direction = dir;
    }
  }
  v.holds = v.min_eigenvalue >= -tol;
  return v;
}

GradientVerdict check_gradient_estimate(const GeneratorFamily& fam, std::size_t s, std::size_t t,
                                        const std::vector<Vec>& tests, double tol, const PropagatorTable* table) {
  if (!fam.markov()) throw InvalidInput("gradient estimate needs a markov family");
  if (s > t || t >= fam.grid().size()) throw InvalidInput("gradient estimate needs grid indices s <= t");
  const Mat P = table ? (*table)(s, t) : propagate(fam, s, t, {0, 1e-9, false}).P;
  GradientVerdict v;
  v.tolerance = tol;
  for (std::size_t i = 0; i < tests.size(); ++i) {
    const Vec& u = tests[i];
    if (static_cast<std::size_t>(u.size()) != fam.states()) throw InvalidInput("test function has the wrong size");
    const Vec Pu = P * u;
    const Vec slack = P * gamma(fam.at(s), u, u) - gamma(fam.at(t), Pu, Pu);
    Eigen::Index x;
    const double m = slack.minCoeff(&x);
    if (m < v.min_slack) {
      v.min_slack = m;
      v.witness_test = i;
      v.witness_state = static_cast<std::size_t>(x);
    }
  }
  v.holds = v.min_slack >= -tol;
  return v;
}

namespace {

struct NIntegral {
  Vec integral;
  Mat P;
};

NIntegral n_integral(const GeneratorFamily& fam, std::size_t s, std::size_t t, const Vec& u,
                     const NGradientOptions& opt) {
  if (s > t || t >= fam.grid().size()) throw InvalidInput("integral needs grid indices s <= t");
  if (opt.panels_per_interval == 0) throw InvalidInput("need at least one Simpson panel");
  const std::size_t n = fam.states();
  const TimeGrid& g = fam.grid();
  std::vector<double> r;  // nodes
  std::vector<double> w;  // Simpson weights
  r.push_back(g[s]);
  w.push_back(0.0);
  for (std::size_t k = s; k < t; ++k) {
    const std::size_t sub = 2 * opt.panels_per_interval;
    const double h = (g[k + 1] - g[k]) / static_cast<double>(sub);
    w.back() += h / 3;
    for (std::size_t j = 1; j <= sub; ++j) {
      r.push_back(j == sub ? g[k + 1] : g[k] + h * static_cast<double>(j));
      w.push_back((j == sub ? 1.0 : (j % 2 ? 4.0 : 2.0)) * h / 3);
    }
  }
  const std::size_t m = r.size();
  const std::size_t steps =
      std::max<std::size_t>(4, opt.steps_per_interval / (2 * opt.panels_per_interval));
  std::vector<Mat> Q;
  for (std::size_t j = 0; j + 1 < m; ++j) Q.push_back(propagate_between(fam, r[j], r[j + 1], steps));
  std::vector<Mat> X(m), Y(m);  // X_j = P(s, r_j), Y_j = P(r_j, t)
  X[0] = Mat::Identity(n, n);
  for (std::size_t j = 1; j < m; ++j) X[j] = Q[j - 1] * X[j - 1];
  Y[m - 1] = Mat::Identity(n, n);
  for (std::size_t j = m - 1; j-- > 0;) Y[j] = Y[j + 1] * Q[j];
  Vec acc = Vec::Zero(n);
  for (std::size_t j = 0; j < m; ++j) {
    const Vec val = Y[j] * (fam.at_time(r[j]) * (X[j] * u));
    acc += w[j] * val.cwiseProduct(val);
  }
  return {acc, Y[0]};
}

}  // namespace

Vec n_gradient_integral(const GeneratorFamily& fam, std::size_t s, std::size_t t, const Vec& u,
                        const NGradientOptions& opt) {
  return n_integral(fam, s, t, u, opt).integral;
}

GradientVerdict check_N_gradient_estimate(const GeneratorFamily& fam, std::size_t s, std::size_t t, double N,
                                          const std::vector<Vec>& tests, double tol, const NGradientOptions& opt) {
  if (!(N > 0)) throw InvalidInput("N must be positive");
  if (std::isinf(N)) return check_gradient_estimate(fam, s, t, tests, tol);
  if (!fam.markov()) throw InvalidInput("gradient estimate needs a markov family");
  GradientVerdict v;
  v.tolerance = tol;
  for (std::size_t i = 0; i < tests.size(); ++i) {
    const Vec& u = tests[i];
    if (static_cast<std::size_t>(u.size()) != fam.states()) throw InvalidInput("test function has the wrong size");
    const NIntegral ni = n_integral(fam, s, t, u, opt);
    const Vec Pu = ni.P * u;
    const Vec extra = (2 / N) * ni.integral;
    const Vec slack = ni.P * gamma(fam.at(s), u, u) - gamma(fam.at(t), Pu, Pu) - extra;
    Eigen::Index x;
    const double m = slack.minCoeff(&x);
    if (m < v.min_slack) {
      v.min_slack = m;
      v.witness_test = i;
      v.witness_state = static_cast<std::size_t>(x);
      v.integral_term = extra(x);
    }
  }
  v.holds = v.min_slack >= -tol;
  return v;
}

std::optional<GradientWitness> find_gradient_witness(const GeneratorFamily& fam, double tol,
                                                     const PropagatorTable* table) {
  if (!fam.markov()) throw InvalidInput("gradient estimate needs a markov family");
  std::optional<PropagatorTable> own;
  if (!table) {
    own.emplace(fam);
    table = &*own;
  }
  const std::size_t M = fam.grid().size();
  std::vector<std::pair<std::size_t, Vec>> candidates;  // (slice, direction)
  for (std::size_t k = 0; k < M; ++k) {
    const Mat& L = fam.at(k);
    const TimeGrid& g = fam.grid();
    const std::size_t lo = k == 0 ? 0 : k - 1, hi = k + 1 == M ? k : k + 1;
    const Mat Ldot = (fam.at(hi) - fam.at(lo)) / (g[hi] - g[lo]);
    const FormField Adot = gamma_form(Ldot);
    const FormField B = gamma2_form(L);
    for (std::size_t x = 0; x < fam.states(); ++x) {
      Vec dir;
      if (min_eigen(2 * B[x] - Adot[x], &dir) < -tol) candidates.emplace_back(k, dir);
    }
  }
  std::optional<GradientWitness> best;
  auto consider = [&](std::size_t s, std::size_t t, const Vec& u) {
    const Mat& P = (*table)(s, t);
    const Vec Pu = P * u;
    const Vec slack = P * gamma(fam.at(s), u, u) - gamma(fam.at(t), Pu, Pu);
    Eigen::Index x;
    const double m = slack.minCoeff(&x);
    if (m < -tol && (!best || m < best->slack)) best = GradientWitness{u, s, t, static_cast<std::size_t>(x), m};
  };
  for (const auto& [k, u] : candidates)
    for (std::size_t s = k >= 2 ? k - 2 : 0; s <= k && s + 1 < M; ++s)
      for (std::size_t t = std::max(s + 1, k); t < M && t <= k + 2; ++t) consider(s, t, u);
  if (!best)
    for (const auto& c : candidates)
      for (std::size_t s = 0; s + 1 < M; ++s)
        for (std::size_t t = s + 1; t < M; ++t) consider(s, t, c.second);
  return best;
}

Mat weighted_generator(const Mat& L0, const Vec& f) {
  const Eigen::Index n = L0.rows();
  if (f.size() != n) throw InvalidInput("weight has the wrong size");
  Mat L = Mat::Zero(n, n);
  for (Eigen::Index x = 0; x < n; ++x) {
    double diag = 0;
    for (Eigen::Index y = 0; y < n; ++y) {
      if (y == x) continue;
      L(x, y) = L0(x, y) * (1 - 0.5 * (f(y) - f(x)));
      diag -= L(x, y);
    }
    L(x, x) = diag;
  }
  return L;
}

WeightedIdentityReport check_weighted_identities(const Mat& L0, const Vec& f, const std::vector<Vec>& tests,
                                                 const std::vector<std::size_t>& states, double threshold) {
  const Mat L = weighted_generator(L0, f);
  WeightedIdentityReport r;
  for (const Vec& u : tests) {
    const Vec d1 = gamma(L, u, u) - gamma(L0, u, u);
    const Vec d2 = gamma2(L, u, u) - gamma2(L0, u, u) - hessian(L0, f, u, u);
    for (std::size_t x : states) {
      r.gamma_residual = std::max(r.gamma_residual, std::abs(d1(x)));
      r.gamma2_residual = std::max(r.gamma2_residual, std::abs(d2(x)));
    }
  }
  r.flagged = r.gamma_residual > threshold || r.gamma2_residual > threshold;
  return r;
}

Mat circle_laplacian(std::size_t n, double circumference) {
  if (n < 3) throw InvalidInput("circle needs at least 3 points");
  if (!(circumference > 0)) throw InvalidInput("circumference must be positive");
  const double h = circumference / static_cast<double>(n), c = 1 / (h * h);
  Mat L = Mat::Zero(n, n);
  for (std::size_t x = 0; x < n; ++x) {
    L(x, (x + 1) % n) += c;
    L(x, (x + n - 1) % n) += c;
    L(x, x) = -2 * c;
  }
  return L;
}

Mat interval_laplacian(std::size_t n, double length) {
  if (n < 2) throw InvalidInput("interval needs at least 2 points");
  if (!(length > 0)) throw InvalidInput("length must be positive");
  const double h = length / static_cast<double>(n - 1), c = 1 / (h * h);
  Mat L = Mat::Zero(n, n);
  for (std::size_t x = 0; x < n; ++x) {
    if (x > 0) L(x, x - 1) = c;
    if (x + 1 < n) L(x, x + 1) = c;
    L(x, x) = -L.row(x).sum();
  }
  return L;
}

MovingQuadraticReport moving_quadratic_check(std::size_t n, double length, double psi, double psi_rate, double z,
                                             const std::vector<Vec>& tests, const std::vector<std::size_t>& states) {
  if (!(psi > 0)) throw InvalidInput("psi must be positive");
  const Mat L1 = interval_laplacian(n, length);
  const Mat L = psi * L1;
  const double h = length / static_cast<double>(n - 1);
  Vec f(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = h * static_cast<double>(i) - z;
    f(i) = psi_rate * x * x / 2;
  }
  MovingQuadraticReport r;
  for (const Vec& u : tests) {
    const Vec slack = gamma2(L, u, u) + hessian(L, f, u, u) - psi_rate * gamma(L1, u, u);
    for (std::size_t x : states) {
      r.min_slack = std::min(r.min_slack, slack(x));
      r.max_residual = std::max(r.max_residual, std::abs(slack(x)));
    }
  }
  return r;
}

}  // namespace srf
