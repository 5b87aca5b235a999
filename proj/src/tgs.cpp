#include "srf/tgs.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "srf/error.hpp"

namespace srf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double rel_tol(double scale) { return 1e-12 * std::max(1.0, scale); }

}  // namespace

DiscreteGeodesicSpace::DiscreteGeodesicSpace(std::size_t vertex_count, std::vector<Edge> edges, TimeGrid grid,
                                             std::vector<std::vector<double>> lengths)
    : n_(vertex_count), edges_(std::move(edges)), grid_(std::move(grid)), lengths_(std::move(lengths)) {
  if (n_ == 0) throw InvalidInput("space has no vertices");
  if (lengths_.size() != grid_.size()) throw InvalidInput("length table must have one row per grid time");
  for (const auto& e : edges_)
    if (e.u >= n_ || e.v >= n_ || e.u == e.v) throw InvalidInput("edge endpoint out of range or loop");
  for (const auto& row : lengths_) {
    if (row.size() != edges_.size()) throw InvalidInput("length table row does not match edge count");
    for (double l : row)
      if (!(l >= 0) || !std::isfinite(l)) throw InvalidInput("edge lengths must be finite and non-negative");
  }
  adj_.assign(n_, {});
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    adj_[edges_[e].u].push_back({edges_[e].v, e});
    adj_[edges_[e].v].push_back({edges_[e].u, e});
  }
  for (auto& a : adj_) std::sort(a.begin(), a.end());

  dist_.resize(grid_.size());
  for (std::size_t k = 0; k < grid_.size(); ++k) {
    Eigen::MatrixXd d = Eigen::MatrixXd::Constant(n_, n_, kInf);
    for (std::size_t x = 0; x < n_; ++x) d(x, x) = 0;
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      auto [u, v] = edges_[e];
      d(u, v) = d(v, u) = std::min(d(u, v), lengths_[k][e]);
    }
    for (std::size_t m = 0; m < n_; ++m)
      for (std::size_t x = 0; x < n_; ++x) {
        if (d(x, m) == kInf) continue;
        for (std::size_t y = 0; y < n_; ++y) {
          double via = d(x, m) + d(m, y);
          if (via < d(x, y)) d(x, y) = via;
        }
      }
    if (!d.allFinite()) throw InvalidInput("graph is disconnected");
    dist_[k] = std::move(d);
  }
}

double DiscreteGeodesicSpace::max_edge_length(std::size_t t) const {
  double h = 0;
  for (double l : lengths_[t]) h = std::max(h, l);
  return h;
}

bool DiscreteGeodesicSpace::is_static(double tol) const {
  for (std::size_t k = 1; k < lengths_.size(); ++k)
    for (std::size_t e = 0; e < edges_.size(); ++e)
      if (std::abs(lengths_[k][e] - lengths_[0][e]) > tol) return false;
  return true;
}

DiscreteGeodesicSpace DiscreteGeodesicSpace::with_lengths(TimeGrid grid,
                                                          std::vector<std::vector<double>> lengths) const {
  return DiscreteGeodesicSpace(n_, edges_, std::move(grid), std::move(lengths));
}

PathEnumeration shortest_paths(const DiscreteGeodesicSpace& space, std::size_t t, std::size_t x, std::size_t y,
                               std::size_t cap) {
  const auto& d = space.distances(t);
  const double tol = rel_tol(space.diameter(t));
  PathEnumeration out;
  std::vector<std::size_t> path{x};
  std::vector<char> on_path(space.vertex_count(), 0);
  on_path[x] = 1;

  // Depth-first in increasing vertex order yields lexicographic output.
  std::function<bool(std::size_t)> dfs = [&](std::size_t u) -> bool {
    if (u == y) {
      if (out.paths.size() == cap) {
        out.truncated = true;
        return false;
      }
      out.paths.push_back(path);
      return true;
    }
    for (auto [w, e] : space.neighbours(u)) {
      if (on_path[w]) continue;
      const double l = space.length(t, e);
      if (std::abs(d(x, u) + l - d(x, w)) > tol) continue;
      if (std::abs(d(x, w) + d(w, y) - d(x, y)) > tol) continue;
      path.push_back(w);
      on_path[w] = 1;
      bool keep_going = dfs(w);
      on_path[w] = 0;
      path.pop_back();
      if (!keep_going) return false;
    }
    return true;
  };
  dfs(x);
  out.paths.erase(std::unique(out.paths.begin(), out.paths.end()), out.paths.end());
  return out;
}

std::size_t DiscreteGeodesic::nearest_index(double tau) const {
  std::size_t best = 0;
  double best_gap = kInf;
  for (std::size_t i = 0; i < params.size(); ++i) {
    double gap = std::abs(params[i] - tau);
    if (gap < best_gap - 1e-14) {
      best_gap = gap;
      best = i;
    }
  }
  return best;
}

DiscreteGeodesic geodesic_from_path(const DiscreteGeodesicSpace& space, std::size_t t,
                                    const std::vector<std::size_t>& path) {
  if (path.empty()) throw InvalidInput("empty path");
  DiscreteGeodesic g;
  g.time = t;
  if (path.size() == 1) {
    g.params = {0.0, 1.0};
    g.points = {path[0], path[0]};
    return g;
  }
  std::vector<double> arc{0.0};
  for (std::size_t i = 1; i < path.size(); ++i)
    arc.push_back(arc.back() + space.distance(t, path[i - 1], path[i]));
  g.length = arc.back();
  g.points = path;
  for (double a : arc) g.params.push_back(g.length > 0 ? a / g.length : 0.0);
  g.params.back() = 1.0;
  return g;
}

namespace {

// Best chain 0 = i_0 < ... < i_m = last through strictly increasing parameters.
template <class Weight, class Better>
double chain_dp(const DiscreteGeodesic& c, Weight w, Better better, double worst) {
  const std::size_t n = c.size();
  std::vector<double> best(n, worst);
  best[0] = 0.0;
  for (std::size_t j = 1; j < n; ++j)
    for (std::size_t i = 0; i < j; ++i) {
      if (!(c.params[j] > c.params[i]) || best[i] == worst) continue;
      double cand = best[i] + w(i, j);
      if (better(cand, best[j])) best[j] = cand;
    }
  return best[n - 1] == worst ? 0.0 : best[n - 1];
}

}  // namespace

double action(const DiscreteGeodesicSpace& space, const DiscreteGeodesic& curve, std::size_t t) {
  auto w = [&](std::size_t i, std::size_t j) {
    double d = space.distance(t, curve.points[i], curve.points[j]);
    return d * d / (curve.params[j] - curve.params[i]);
  };
  return chain_dp(curve, w, [](double a, double b) { return a > b; }, -kInf);
}

double left_derivative_sq(const DiscreteGeodesicSpace& space, std::size_t t, std::size_t x, std::size_t y) {
  if (t == 0) throw InvalidInput("no left difference at the first grid time");
  const double dt = space.grid()[t] - space.grid()[t - 1];
  const double a = space.distance(t, x, y), b = space.distance(t - 1, x, y);
  return (a * a - b * b) / dt;
}

double strain(const DiscreteGeodesicSpace& space, const DiscreteGeodesic& curve, std::size_t t) {
  if (t == 0) throw InvalidInput("no left difference at the first grid time");
  auto w = [&](std::size_t i, std::size_t j) {
    return left_derivative_sq(space, t, curve.points[i], curve.points[j]) / (curve.params[j] - curve.params[i]);
  };
  return chain_dp(curve, w, [](double a, double b) { return a < b; }, kInf);
}

ControlEstimate estimate_controls(const DiscreteGeodesicSpace& space) {
  const std::size_t M = space.grid().size(), n = space.vertex_count();
  ControlEstimate c;
  c.kappa.assign(M, 0.0);
  c.lambda.assign(M, 0.0);
  for (std::size_t k = 0; k < M; ++k)
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = x + 1; y < n; ++y)
        if (space.distance(k, x, y) <= 0) throw InvalidInput("pseudo-metric unsupported here");
  for (std::size_t k = 1; k < M; ++k) {
    const double dt = space.grid()[k] - space.grid()[k - 1];
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = x + 1; y < n; ++y) {
        double r = (std::log(space.distance(k, x, y)) - std::log(space.distance(k - 1, x, y))) / dt;
        c.kappa[k] = std::max(c.kappa[k], r);
        c.lambda[k] = std::max(c.lambda[k], -r);
      }
  }
  if (M > 1) {
    c.kappa[0] = c.kappa[1];
    c.lambda[0] = c.lambda[1];
  }
  return c;
}

DiscreteGeodesicSpace read_space_description(std::istream& in) {
  std::size_t n = 0;
  bool have_n = false;
  std::vector<double> times;
  std::vector<Edge> edges;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> edge_index;
  std::map<std::pair<std::size_t, std::size_t>, double> records;  // (time, edge) -> length
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw InvalidInput("space description line " + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    if (key == "vertices") {
      if (!(ls >> n) || n == 0) fail("expected a positive vertex count");
      have_n = true;
    } else if (key == "time") {
      double t;
      if (!(ls >> t)) fail("expected a time value");
      times.push_back(t);
    } else if (key == "edge") {
      std::size_t u, v;
      if (!(ls >> u >> v)) fail("expected two vertex indices");
      if (!have_n || u >= n || v >= n || u == v) fail("edge endpoint out of range");
      auto keyp = std::minmax(u, v);
      if (edge_index.count(keyp)) fail("duplicate edge");
      edge_index[keyp] = edges.size();
      edges.push_back({u, v});
    } else if (key == "length") {
      std::size_t k, u, v;
      double l;
      if (!(ls >> k >> u >> v >> l)) fail("expected <time-index> <u> <v> <length>");
      auto it = edge_index.find(std::minmax(u, v));
      if (it == edge_index.end()) fail("length record for an undeclared edge");
      if (!records.emplace(std::make_pair(k, it->second), l).second) fail("duplicate length record");
    } else {
      fail("unknown record '" + key + "'");
    }
    std::string extra;
    if (ls >> extra) fail("trailing token '" + extra + "'");
  }
  if (!have_n) throw InvalidInput("space description has no vertex count");
  if (times.empty()) throw InvalidInput("space description has no time records");
  std::vector<std::vector<double>> lengths(times.size(), std::vector<double>(edges.size(), 0.0));
  for (std::size_t k = 0; k < times.size(); ++k)
    for (std::size_t e = 0; e < edges.size(); ++e) {
      auto it = records.find({k, e});
      if (it == records.end())
        throw InvalidInput("missing length for edge " + std::to_string(edges[e].u) + "-" +
                           std::to_string(edges[e].v) + " at time index " + std::to_string(k));
      lengths[k][e] = it->second;
    }
  if (records.size() != times.size() * edges.size()) throw InvalidInput("length record with time index out of range");
  return DiscreteGeodesicSpace(n, std::move(edges), TimeGrid(std::move(times)), std::move(lengths));
}

DiscreteGeodesicSpace load_space_description(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open space description '" + path + "'");
  return read_space_description(in);
}

void write_space_description(std::ostream& out, const DiscreteGeodesicSpace& space) {
  auto old = out.precision(17);
  out << "vertices " << space.vertex_count() << '\n';
  for (double t : space.grid().times()) out << "time " << t << '\n';
  for (const auto& e : space.edges()) out << "edge " << e.u << ' ' << e.v << '\n';
  for (std::size_t k = 0; k < space.grid().size(); ++k)
    for (std::size_t e = 0; e < space.edges().size(); ++e)
      out << "length " << k << ' ' << space.edges()[e].u << ' ' << space.edges()[e].v << ' '
          << space.length(k, e) << '\n';
  out.precision(old);
}

namespace {

DiscreteGeodesicSpace build(std::size_t n, std::vector<Edge> edges, double base, const TimeGrid& grid,
                            const LengthScale& scale) {
  std::vector<std::vector<double>> lengths(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    double s = scale ? scale(grid[k]) : 1.0;
    if (!(s >= 0)) throw InvalidInput("length scale must be non-negative");
    lengths[k].assign(edges.size(), base * s);
  }
  return DiscreteGeodesicSpace(n, std::move(edges), grid, std::move(lengths));
}

}  // namespace

DiscreteGeodesicSpace make_cycle(std::size_t n, double circumference, const TimeGrid& grid, const LengthScale& scale) {
  if (n < 3) throw InvalidInput("a cycle needs at least 3 vertices");
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n});
  return build(n, std::move(edges), circumference / static_cast<double>(n), grid, scale);
}

DiscreteGeodesicSpace make_path_graph(std::size_t n, double total_length, const TimeGrid& grid,
                                      const LengthScale& scale) {
  if (n < 2) throw InvalidInput("a path graph needs at least 2 vertices");
  std::vector<Edge> edges;
  for (std::size_t i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1});
  return build(n, std::move(edges), total_length / static_cast<double>(n - 1), grid, scale);
}

}  // namespace srf
