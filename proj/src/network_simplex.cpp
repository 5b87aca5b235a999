#include "srf/network_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "srf/error.hpp"

namespace srf {

namespace {

struct Cell {
  std::size_t i, j;
  double x;
};

class TreeSimplex {
 public:
  TreeSimplex(std::vector<double> a, std::vector<double> b, Eigen::MatrixXd c)
      : m_(a.size()), n_(b.size()), a_(std::move(a)), b_(std::move(b)), c_(std::move(c)) {
    eps_ = 1e-12 * std::max(1.0, c_.cwiseAbs().maxCoeff());
    northwest_corner();
  }

  std::size_t run() {
    std::size_t pivots = 0, degenerate_run = 0;
    const std::size_t limit = 50 * (m_ + n_) * (m_ + n_) + 1000;
    while (pivots < limit) {
      potentials();
      // Dantzig pricing; Bland's rule after a long run of degenerate pivots.
      const bool bland = degenerate_run > m_ + n_;
      std::size_t ei = m_, ej = n_;
      double best = -eps_;
      for (std::size_t i = 0; i < m_ && !(bland && ei < m_); ++i)
        for (std::size_t j = 0; j < n_; ++j) {
          if (basic_(i, j)) continue;
          double r = c_(i, j) - u_[i] - v_[j];
          if (r < best) {
            best = r;
            ei = i;
            ej = j;
            if (bland) break;
          }
        }
      if (ei == m_) return pivots;
      const double theta = pivot(ei, ej);
      degenerate_run = theta <= 0 ? degenerate_run + 1 : 0;
      ++pivots;
    }
    throw NumericalFailure("network simplex did not converge");
  }

  Eigen::MatrixXd plan() const {
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(m_, n_);
    for (const auto& cell : basis_) p(cell.i, cell.j) = std::max(0.0, cell.x);
    return p;
  }

 private:
  void northwest_corner() {
    basic_ = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(m_, n_, false);
    std::vector<double> a = a_, b = b_;
    std::size_t i = 0, j = 0;
    while (true) {
      double x = std::min(a[i], b[j]);
      add_basic(i, j, x);
      a[i] -= x;
      b[j] -= x;
      if (i == m_ - 1 && j == n_ - 1) break;
      if (i == m_ - 1) ++j;
      else if (j == n_ - 1) ++i;
      else if (a[i] <= b[j]) ++i;
      else ++j;
    }
  }

  void add_basic(std::size_t i, std::size_t j, double x) {
    basis_.push_back({i, j, x});
    basic_(i, j) = true;
  }

  // Tree adjacency: node r < m_ is row r, node m_ + c is column c.
  void build_adjacency() {
    adj_.assign(m_ + n_, {});
    for (std::size_t k = 0; k < basis_.size(); ++k) {
      adj_[basis_[k].i].push_back(k);
      adj_[m_ + basis_[k].j].push_back(k);
    }
  }

  void potentials() {
    build_adjacency();
    u_.assign(m_, 0.0);
    v_.assign(n_, 0.0);
    std::vector<char> seen(m_ + n_, 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      std::size_t node = stack.back();
      stack.pop_back();
      for (std::size_t k : adj_[node]) {
        const auto& cell = basis_[k];
        std::size_t other = node < m_ ? m_ + cell.j : cell.i;
        if (seen[other]) continue;
        seen[other] = 1;
        if (node < m_) v_[cell.j] = c_(cell.i, cell.j) - u_[cell.i];
        else u_[cell.i] = c_(cell.i, cell.j) - v_[cell.j];
        stack.push_back(other);
      }
    }
  }

  // Enters (ei, ej), returns the step length.
  double pivot(std::size_t ei, std::size_t ej) {
    // Path in the tree from column node ej back to row node ei.
    const std::size_t start = m_ + ej, goal = ei;
    std::vector<std::size_t> parent_edge(m_ + n_, SIZE_MAX);
    std::vector<char> seen(m_ + n_, 0);
    std::vector<std::size_t> queue{start};
    seen[start] = 1;
    for (std::size_t h = 0; h < queue.size() && !seen[goal]; ++h) {
      std::size_t node = queue[h];
      for (std::size_t k : adj_[node]) {
        const auto& cell = basis_[k];
        std::size_t other = node < m_ ? m_ + cell.j : cell.i;
        if (seen[other]) continue;
        seen[other] = 1;
        parent_edge[other] = k;
        queue.push_back(other);
      }
    }
    if (!seen[goal]) throw NumericalFailure("network simplex basis is not a spanning tree");
    // Walk from goal back to start; edges alternate starting with '-' next to the entering column.
    std::vector<std::size_t> cycle;
    for (std::size_t node = goal; node != start;) {
      std::size_t k = parent_edge[node];
      cycle.push_back(k);
      const auto& cell = basis_[k];
      node = node < m_ ? m_ + cell.j : cell.i;
    }
    std::reverse(cycle.begin(), cycle.end());  // now ordered from the entering column towards ei
    double theta = INFINITY;
    std::size_t leave = SIZE_MAX;
    for (std::size_t q = 0; q < cycle.size(); q += 2) {
      if (basis_[cycle[q]].x < theta) {
        theta = basis_[cycle[q]].x;
        leave = cycle[q];
      }
    }
    theta = std::max(0.0, theta);
    for (std::size_t q = 0; q < cycle.size(); ++q) basis_[cycle[q]].x += (q % 2 == 0 ? -theta : theta);
    basic_(basis_[leave].i, basis_[leave].j) = false;
    basis_[leave] = {ei, ej, theta};
    basic_(ei, ej) = true;
    return theta;
  }

  std::size_t m_, n_;
  std::vector<double> a_, b_;
  Eigen::MatrixXd c_;
  double eps_;
  std::vector<Cell> basis_;
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> basic_;
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<double> u_, v_;
};

}  // namespace

TransportSolution solve_transport(const std::vector<double>& supply, const std::vector<double>& demand,
                                  const Eigen::MatrixXd& cost) {
  if (cost.rows() != static_cast<Eigen::Index>(supply.size()) ||
      cost.cols() != static_cast<Eigen::Index>(demand.size()))
    throw InvalidInput("cost matrix shape does not match the marginals");
  for (double s : supply)
    if (!(s >= 0) || !std::isfinite(s)) throw InvalidInput("supply must be finite and non-negative");
  for (double d : demand)
    if (!(d >= 0) || !std::isfinite(d)) throw InvalidInput("demand must be finite and non-negative");
  if (!cost.allFinite()) throw InvalidInput("cost matrix must be finite");
  const double ta = std::accumulate(supply.begin(), supply.end(), 0.0);
  const double tb = std::accumulate(demand.begin(), demand.end(), 0.0);
  if (std::abs(ta - tb) > 1e-10) throw InvalidInput("marginal mass mismatch");

  // Drop empty rows and columns; they carry no mass.
  std::vector<std::size_t> rows, cols;
  for (std::size_t i = 0; i < supply.size(); ++i)
    if (supply[i] > 0) rows.push_back(i);
  for (std::size_t j = 0; j < demand.size(); ++j)
    if (demand[j] > 0) cols.push_back(j);
  TransportSolution sol;
  sol.plan = Eigen::MatrixXd::Zero(supply.size(), demand.size());
  if (rows.empty() || cols.empty()) return sol;

  std::vector<double> a, b;
  for (auto i : rows) a.push_back(supply[i]);
  for (auto j : cols) b.push_back(demand[j] * ta / tb);
  Eigen::MatrixXd c(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) c(i, j) = cost(rows[i], cols[j]);

  TreeSimplex simplex(a, b, c);
  sol.pivots = simplex.run();
  Eigen::MatrixXd p = simplex.plan();
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) sol.plan(rows[i], cols[j]) = p(i, j);
  sol.cost = (sol.plan.array() * cost.array()).sum();
  return sol;
}

}  // namespace srf
