#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "srf/network_simplex.hpp"
#include "srf/tgs.hpp"

namespace srf {

/// Non-negative weights summing to one within 1e-12.
class ProbabilityVector {
 public:
  ProbabilityVector() = default;
  explicit ProbabilityVector(std::vector<double> p);
  // Divides by the total; the total must be positive.
  static ProbabilityVector normalized(std::vector<double> w);
  static ProbabilityVector dirac(std::size_t n, std::size_t x);
  static ProbabilityVector uniform(std::size_t n);

  std::size_t size() const { return p_.size(); }
  double operator[](std::size_t i) const { return p_[i]; }
  const std::vector<double>& values() const { return p_; }
  std::vector<std::size_t> support() const;

 private:
  std::vector<double> p_;
};

struct TransportResult {
  double cost = 0.0;      // W_t^2
  double distance = 0.0;  // W_t
  Eigen::MatrixXd plan;   // optimal coupling
};

// Squared-distance optimal transport for d_t.
TransportResult wasserstein(const DiscreteGeodesicSpace& space, std::size_t t, const ProbabilityVector& mu,
                            const ProbabilityVector& nu);

// Transport with a caller-supplied cost matrix.
TransportResult transport_with_cost(const Eigen::MatrixXd& cost, const ProbabilityVector& mu,
                                    const ProbabilityVector& nu);

struct MeasurePath {
  std::size_t time = 0;
  std::vector<double> tau;
  std::vector<ProbabilityVector> measures;
  bool truncated = false;  // a path enumeration hit its cap

  std::size_t size() const { return tau.size(); }
};

/// Mass atoms of a coupling in row-major order.
struct Atom {
  std::size_t x, y;
  double mass;
};
std::vector<Atom> coupling_atoms(const Eigen::MatrixXd& plan, double threshold = 1e-14);

// Each atom q(x,y) sits at the vertex nearest to arc length tau * d_t(x,y) along its
// chosen shortest path. path_choice[k] selects the path of atom k (default: the
// lexicographically smallest). The endpoints are returned exactly.
MeasurePath displacement_interpolation(const DiscreteGeodesicSpace& space, std::size_t t,
                                       const ProbabilityVector& mu, const ProbabilityVector& nu,
                                       const Eigen::MatrixXd& plan, const std::vector<double>& taus,
                                       const std::vector<std::size_t>& path_choice = {});

std::vector<double> uniform_taus(std::size_t intervals);

// Relative entropy of mu w.r.t. e^{-f} m: sum mu log(mu / m) + sum f mu; +inf if mu charges an m-null vertex.
double entropy(const std::vector<double>& m, const std::vector<double>& f, const ProbabilityVector& mu);

struct PathFunctionals {
  double action = 0.0;  // sup over sub-partitions of sum W_t^2 / dtau
  double strain = 0.0;  // inf over sub-partitions of sum (W_t^2 - W_{t-1}^2) / (dt dtau)
};

PathFunctionals measure_path_functionals(const DiscreteGeodesicSpace& space, std::size_t t,
                                         const MeasurePath& path);

}  // namespace srf
