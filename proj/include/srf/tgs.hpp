#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "srf/time_grid.hpp"

namespace srf {

struct Edge {
  std::size_t u = 0;
  std::size_t v = 0;
};

/// Finite graph whose edge lengths vary over a time grid; d_t is the
/// shortest-path metric of the lengths at time index t.
class DiscreteGeodesicSpace {
 public:
  // lengths[k][e] is the length of edge e at grid time k; lengths must be >= 0.
  DiscreteGeodesicSpace(std::size_t vertex_count, std::vector<Edge> edges, TimeGrid grid,
                        std::vector<std::vector<double>> lengths);

  std::size_t vertex_count() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const TimeGrid& grid() const { return grid_; }
  double length(std::size_t t, std::size_t e) const { return lengths_[t][e]; }
  const std::vector<std::vector<double>>& lengths() const { return lengths_; }

  const Eigen::MatrixXd& distances(std::size_t t) const { return dist_[t]; }
  double distance(std::size_t t, std::size_t x, std::size_t y) const { return dist_[t](x, y); }
  double diameter(std::size_t t) const { return dist_[t].maxCoeff(); }
  double max_edge_length(std::size_t t) const;

  // Neighbours of x as (vertex, edge index), sorted by vertex.
  const std::vector<std::pair<std::size_t, std::size_t>>& neighbours(std::size_t x) const { return adj_[x]; }

  bool is_static(double tol = 0.0) const;

  // Same graph with lengths scaled per time index.
  DiscreteGeodesicSpace with_lengths(TimeGrid grid, std::vector<std::vector<double>> lengths) const;

 private:
  std::size_t n_;
  std::vector<Edge> edges_;
  TimeGrid grid_;
  std::vector<std::vector<double>> lengths_;
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj_;
  std::vector<Eigen::MatrixXd> dist_;
};

struct PathEnumeration {
  std::vector<std::vector<std::size_t>> paths;  // lexicographically ordered vertex sequences
  bool truncated = false;                       // more paths exist than the cap allowed
};

inline constexpr std::size_t kDefaultPathCap = 64;

// All shortest d_t paths from x to y, up to cap.
PathEnumeration shortest_paths(const DiscreteGeodesicSpace& space, std::size_t t, std::size_t x, std::size_t y,
                               std::size_t cap = kDefaultPathCap);

/// Constant-speed d_t geodesic sampled at the vertices of a shortest path.
/// params[i] is the normalized arc length of points[i].
struct DiscreteGeodesic {
  std::size_t time = 0;
  std::vector<double> params;
  std::vector<std::size_t> points;
  double length = 0.0;

  std::size_t size() const { return points.size(); }
  std::size_t front() const { return points.front(); }
  std::size_t back() const { return points.back(); }
  // Index of the parameter closest to tau (ties go to the smaller index).
  std::size_t nearest_index(double tau) const;
  std::size_t at(double tau) const { return points[nearest_index(tau)]; }
};

DiscreteGeodesic geodesic_from_path(const DiscreteGeodesicSpace& space, std::size_t t,
                                    const std::vector<std::size_t>& path);

// Supremum over sub-partitions of the curve's own parameters of sum d_t^2 / dtau.
double action(const DiscreteGeodesicSpace& space, const DiscreteGeodesic& curve, std::size_t t);

// Infimum over sub-partitions of sum (d_t^2 - d_{t-1}^2) / (dt dtau); needs t >= 1.
double strain(const DiscreteGeodesicSpace& space, const DiscreteGeodesic& curve, std::size_t t);

// Backward difference of d^2 at time index t.
double left_derivative_sq(const DiscreteGeodesicSpace& space, std::size_t t, std::size_t x, std::size_t y);

/// Log-Lipschitz rates of the metric between consecutive grid times.
/// kappa[k], lambda[k] bound the interval (t_{k-1}, t_k]; entry 0 repeats entry 1.
struct ControlEstimate {
  std::vector<double> kappa;
  std::vector<double> lambda;
};

ControlEstimate estimate_controls(const DiscreteGeodesicSpace& space);

// Text format:
//   vertices <n>
//   time <t>                        one line per grid time, increasing
//   edge <u> <v>                    declares an edge
//   length <time-index> <u> <v> <l> one record per edge per time
// '#' starts a comment.
DiscreteGeodesicSpace read_space_description(std::istream& in);
DiscreteGeodesicSpace load_space_description(const std::string& path);
void write_space_description(std::ostream& out, const DiscreteGeodesicSpace& space);

// Builders. scale(t) multiplies every edge length at time t.
using LengthScale = std::function<double(double)>;
DiscreteGeodesicSpace make_cycle(std::size_t n, double circumference, const TimeGrid& grid,
                                 const LengthScale& scale = nullptr);
DiscreteGeodesicSpace make_path_graph(std::size_t n, double total_length, const TimeGrid& grid,
                                      const LengthScale& scale = nullptr);

}  // namespace srf
