#include "srf/convexity1d.hpp"

#include <cmath>

#include "srf/error.hpp"

namespace srf {

SampledFunction1D::SampledFunction1D(std::vector<double> t, std::vector<double> u)
    : tau(std::move(t)), value(std::move(u)) {
  if (tau.size() != value.size()) throw InvalidInput("parameter and value arrays differ in length");
  for (std::size_t i = 0; i < tau.size(); ++i) {
    if (!std::isfinite(tau[i])) throw InvalidInput("non-finite parameter");
    if (i > 0 && !(tau[i] > tau[i - 1])) throw InvalidInput("parameters must be strictly increasing");
    if (std::isnan(value[i]) || value[i] == -kInfinity) throw InvalidInput("value must be finite or +inf");
  }
}

double SampledFunction1D::max_step() const {
  double h = 0.0;
  for (std::size_t i = 1; i < tau.size(); ++i) h = std::max(h, tau[i] - tau[i - 1]);
  return h;
}

double default_tolerance(const SampledFunction1D& u) {
  double h = u.max_step();
  return 10.0 * h * h;
}

ConvexityVerdict is_k_convex(const SampledFunction1D& u, double K, double tol) {
  const std::size_t n = u.size();
  if (n < 3) throw InvalidInput("insufficient grid: need at least 3 samples");
  ConvexityVerdict v;
  v.tolerance = tol;
  for (std::size_t a = 0; a + 2 < n; ++a) {
    for (std::size_t c = a + 2; c < n; ++c) {
      const double ta = u.tau[a], tc = u.tau[c];
      for (std::size_t b = a + 1; b < c; ++b) {
        const double tb = u.tau[b];
        const double wa = (tc - tb) / (tc - ta), wc = (tb - ta) / (tc - ta);
        double slack;
        if (u.value[a] == kInfinity || u.value[c] == kInfinity) {
          slack = kInfinity;  // (+inf) - (+inf) counts as +inf
        } else if (u.value[b] == kInfinity) {
          slack = -kInfinity;
        } else {
          slack = wa * u.value[a] + wc * u.value[c] - 0.5 * K * (tc - tb) * (tb - ta) - u.value[b];
        }
        if (slack < v.min_slack) {
          v.min_slack = slack;
          v.witness = {a, b, c};
        }
      }
    }
  }
  v.holds = v.min_slack >= -tol;
  return v;
}

ConvexityVerdict is_kn_convex(const SampledFunction1D& u, double K, double N, double tol) {
  const std::size_t n = u.size();
  if (n < 4) throw InvalidInput("insufficient grid: need at least 4 samples");
  if (!(N > 0)) throw InvalidInput("N must be positive");
  ConvexityVerdict v;
  v.tolerance = tol;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double hl = u.tau[i] - u.tau[i - 1], hr = u.tau[i + 1] - u.tau[i];
    const double ul = u.value[i - 1], um = u.value[i], ur = u.value[i + 1];
    double slack;
    if (ul == kInfinity || um == kInfinity || ur == kInfinity) {
      slack = um == kInfinity ? -kInfinity : kInfinity;
    } else {
      // Second-order accurate on uneven grids.
      const double d1 = (-hr / (hl * (hl + hr))) * ul + ((hr - hl) / (hl * hr)) * um + (hl / (hr * (hl + hr))) * ur;
      const double d2 = 2.0 * (ul / (hl * (hl + hr)) - um / (hl * hr) + ur / (hr * (hl + hr)));
      slack = d2 - K - (std::isinf(N) ? 0.0 : d1 * d1 / N);
    }
    if (slack < v.min_slack) {
      v.min_slack = slack;
      v.witness = {i - 1, i, i + 1};
    }
  }
  v.holds = v.min_slack >= -tol;
  return v;
}

double green_chi(double tau, double sigma) {
  if (tau < 0 || tau > 1 || sigma < 0 || sigma > 1) throw InvalidInput("green_chi arguments must lie in [0,1]");
  return std::min(sigma * (1 - tau), tau * (1 - sigma));
}

double lambda_weight(double tau, double sigma) {
  if (!(tau > 0 && tau <= 0.5)) throw InvalidInput("lambda_weight requires tau in (0, 1/2]");
  if (sigma < 0 || sigma > 1) throw InvalidInput("lambda_weight requires sigma in [0,1]");
  return (green_chi(tau, sigma) + green_chi(1 - tau, sigma)) / tau;
}

double phi_N(double u, double N) {
  if (!(N > 0)) throw InvalidInput("phi_N requires N > 0");
  if (std::isinf(N)) return u;
  return u + u * u / N;
}

}  // namespace srf
