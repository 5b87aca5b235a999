#include "srf/transport.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "srf/error.hpp"

namespace srf {

ProbabilityVector::ProbabilityVector(std::vector<double> p) : p_(std::move(p)) {
  if (p_.empty()) throw InvalidInput("probability vector is empty");
  double total = 0;
  for (double x : p_) {
    if (!(x >= 0) || !std::isfinite(x)) throw InvalidInput("probability weights must be finite and non-negative");
    total += x;
  }
  if (std::abs(total - 1.0) > 1e-12) throw InvalidInput("probability weights must sum to 1");
}

ProbabilityVector ProbabilityVector::normalized(std::vector<double> w) {
  double total = 0;
  for (double& x : w) {
    if (x < 0 && x > -1e-13) x = 0;
    if (!(x >= 0) || !std::isfinite(x)) throw InvalidInput("weights must be finite and non-negative");
    total += x;
  }
  if (!(total > 0)) throw InvalidInput("weights have zero total mass");
  for (double& x : w) x /= total;
  // Re-sum after division can still be off by a few ulps.
  return ProbabilityVector(std::move(w));
}

ProbabilityVector ProbabilityVector::dirac(std::size_t n, std::size_t x) {
  if (x >= n) throw InvalidInput("dirac vertex out of range");
  std::vector<double> p(n, 0.0);
  p[x] = 1.0;
  return ProbabilityVector(std::move(p));
}

ProbabilityVector ProbabilityVector::uniform(std::size_t n) {
  return normalized(std::vector<double>(n, 1.0));
}

std::vector<std::size_t> ProbabilityVector::support() const {
  std::vector<std::size_t> s;
  for (std::size_t i = 0; i < p_.size(); ++i)
    if (p_[i] > 0) s.push_back(i);
  return s;
}

TransportResult transport_with_cost(const Eigen::MatrixXd& cost, const ProbabilityVector& mu,
                                    const ProbabilityVector& nu) {
  auto sol = solve_transport(mu.values(), nu.values(), cost);
  TransportResult r;
  r.plan = std::move(sol.plan);
  r.cost = std::max(0.0, sol.cost);
  r.distance = std::sqrt(r.cost);
  return r;
}

TransportResult wasserstein(const DiscreteGeodesicSpace& space, std::size_t t, const ProbabilityVector& mu,
                            const ProbabilityVector& nu) {
  if (mu.size() != space.vertex_count() || nu.size() != space.vertex_count())
    throw InvalidInput("measure size does not match the vertex count");
  if (t >= space.grid().size()) throw InvalidInput("time index out of range");
  Eigen::MatrixXd c = space.distances(t).array().square();
  return transport_with_cost(c, mu, nu);
}

std::vector<Atom> coupling_atoms(const Eigen::MatrixXd& plan, double threshold) {
  std::vector<Atom> atoms;
  for (Eigen::Index i = 0; i < plan.rows(); ++i)
    for (Eigen::Index j = 0; j < plan.cols(); ++j)
      if (plan(i, j) > threshold)
        atoms.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), plan(i, j)});
  return atoms;
}

std::vector<double> uniform_taus(std::size_t intervals) {
  if (intervals == 0) throw InvalidInput("need at least one interval");
  std::vector<double> t(intervals + 1);
  for (std::size_t k = 0; k <= intervals; ++k) t[k] = static_cast<double>(k) / static_cast<double>(intervals);
  return t;
}

MeasurePath displacement_interpolation(const DiscreteGeodesicSpace& space, std::size_t t,
                                       const ProbabilityVector& mu, const ProbabilityVector& nu,
                                       const Eigen::MatrixXd& plan, const std::vector<double>& taus,
                                       const std::vector<std::size_t>& path_choice) {
  const std::size_t n = space.vertex_count();
  if (mu.size() != n || nu.size() != n) throw InvalidInput("measure size does not match the vertex count");
  if (plan.rows() != static_cast<Eigen::Index>(n) || plan.cols() != static_cast<Eigen::Index>(n))
    throw InvalidInput("coupling shape does not match the vertex count");
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(plan.row(i).sum() - mu[i]) > 1e-9 || std::abs(plan.col(i).sum() - nu[i]) > 1e-9)
      throw InvalidInput("coupling marginals do not match the endpoint measures");
  }
  auto atoms = coupling_atoms(plan);
  if (!path_choice.empty() && path_choice.size() != atoms.size())
    throw InvalidInput("path choice must list one entry per coupling atom");

  MeasurePath out;
  out.time = t;
  out.tau = taus;
  // Arc-length profile of the chosen path per atom.
  std::vector<std::vector<std::size_t>> verts(atoms.size());
  std::vector<std::vector<double>> arcs(atoms.size());
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    const auto [x, y, q] = atoms[k];
    std::size_t choice = path_choice.empty() ? 0 : path_choice[k];
    auto paths = shortest_paths(space, t, x, y, choice + 1);
    out.truncated = out.truncated || paths.truncated;
    if (choice >= paths.paths.size()) choice = paths.paths.size() - 1;
    verts[k] = paths.paths[choice];
    arcs[k].push_back(0.0);
    for (std::size_t i = 1; i < verts[k].size(); ++i)
      arcs[k].push_back(arcs[k].back() + space.distance(t, verts[k][i - 1], verts[k][i]));
  }
  for (double tau : taus) {
    if (tau < 0 || tau > 1) throw InvalidInput("interpolation parameter outside [0,1]");
    if (tau == 0.0) {
      out.measures.push_back(mu);
      continue;
    }
    if (tau == 1.0) {
      out.measures.push_back(nu);
      continue;
    }
    std::vector<double> w(n, 0.0);
    for (std::size_t k = 0; k < atoms.size(); ++k) {
      const double target = tau * arcs[k].back();
      std::size_t best = 0;
      double gap = INFINITY;
      for (std::size_t i = 0; i < arcs[k].size(); ++i) {
        double g = std::abs(arcs[k][i] - target);
        if (g < gap - 1e-12) {
          gap = g;
          best = i;
        }
      }
      w[verts[k][best]] += atoms[k].mass;
    }
    out.measures.push_back(ProbabilityVector::normalized(std::move(w)));
  }
  return out;
}

double entropy(const std::vector<double>& m, const std::vector<double>& f, const ProbabilityVector& mu) {
  if (m.size() != mu.size() || f.size() != mu.size()) throw InvalidInput("entropy inputs differ in size");
  double s = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (mu[i] <= 0) continue;
    if (m[i] <= 0) return INFINITY;
    s += mu[i] * (std::log(mu[i] / m[i]) + f[i]);
  }
  return s;
}

PathFunctionals measure_path_functionals(const DiscreteGeodesicSpace& space, std::size_t t,
                                         const MeasurePath& path) {
  if (t == 0) throw InvalidInput("no left difference at the first grid time");
  const std::size_t k = path.size();
  if (k < 2) throw InvalidInput("measure path needs at least two samples");
  const double dt = space.grid()[t] - space.grid()[t - 1];
  Eigen::MatrixXd now = Eigen::MatrixXd::Zero(k, k), before = Eigen::MatrixXd::Zero(k, k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) {
      now(i, j) = wasserstein(space, t, path.measures[i], path.measures[j]).cost;
      before(i, j) = wasserstein(space, t - 1, path.measures[i], path.measures[j]).cost;
    }
  std::vector<double> amax(k, -INFINITY), bmin(k, INFINITY);
  amax[0] = bmin[0] = 0.0;
  for (std::size_t j = 1; j < k; ++j)
    for (std::size_t i = 0; i < j; ++i) {
      const double dtau = path.tau[j] - path.tau[i];
      if (!(dtau > 0)) continue;
      amax[j] = std::max(amax[j], amax[i] + now(i, j) / dtau);
      bmin[j] = std::min(bmin[j], bmin[i] + (now(i, j) - before(i, j)) / dt / dtau);
    }
  return {amax[k - 1], bmin[k - 1]};
}

}  // namespace srf
