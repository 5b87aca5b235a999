#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <vector>

namespace srf {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Values of a function on a strictly increasing parameter grid.
/// Values may be +inf; NaN and -inf are rejected.
struct SampledFunction1D {
  std::vector<double> tau;
  std::vector<double> value;

  SampledFunction1D() = default;
  SampledFunction1D(std::vector<double> t, std::vector<double> u);

  std::size_t size() const { return tau.size(); }
  double max_step() const;
};

struct ConvexityVerdict {
  bool holds = true;
  double min_slack = kInfinity;
  double tolerance = 0.0;
  // Sample indices (a, b, c) where the smallest slack was observed.
  std::array<std::size_t, 3> witness{0, 0, 0};
};

// Three-point test u(b) <= interpolation of u(a), u(c) - K/2 (c-b)(b-a) over all triples.
ConvexityVerdict is_k_convex(const SampledFunction1D& u, double K, double tol);

// Pointwise test u'' >= K + (u')^2 / N with central differences; N may be +inf.
ConvexityVerdict is_kn_convex(const SampledFunction1D& u, double K, double N, double tol);

// 10 h^2 with h the largest parameter step.
double default_tolerance(const SampledFunction1D& u);

// Green function of -d^2/dtau^2 on [0,1] with Dirichlet conditions.
double green_chi(double tau, double sigma);

// (chi(tau, sigma) + chi(1 - tau, sigma)) / tau for tau in (0, 1/2].
double lambda_weight(double tau, double sigma);

// u + u^2 / N, with phi_N(u, inf) = u.
double phi_N(double u, double N);

}  // namespace srf
