#include "srf/qp.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "srf/error.hpp"

namespace srf {

Vec solve_equality_qp(const Mat& G, const Vec& c, const Mat& A, const Vec& b) {
  const Eigen::Index n = G.rows(), m = A.rows();
  if (G.cols() != n || c.size() != n || (m > 0 && A.cols() != n) || b.size() != m)
    throw InvalidInput("quadratic program dimensions do not match");
  Mat K = Mat::Zero(n + m, n + m);
  K.topLeftCorner(n, n) = G;
  if (m > 0) {
    K.topRightCorner(n, m) = A.transpose();
    K.bottomLeftCorner(m, n) = A;
  }
  Vec rhs(n + m);
  rhs << -c, b;
  Eigen::CompleteOrthogonalDecomposition<Mat> cod(K);
  const Vec sol = cod.solve(rhs);
  if (!sol.allFinite() || (K * sol - rhs).norm() > 1e-8 * std::max(1.0, rhs.norm()))
    throw NumericalFailure("equality-constrained system is inconsistent");
  return sol.head(n);
}

namespace {

// Step p and multipliers for the working set: G p + g = A_W^T lambda, A_W p = 0.
void working_step(const Mat& G, const Vec& g, const Mat& AW, Vec& p, Vec& lambda) {
  const Eigen::Index n = G.rows(), m = AW.rows();
  Mat K = Mat::Zero(n + m, n + m);
  K.topLeftCorner(n, n) = G;
  if (m > 0) {
    K.topRightCorner(n, m) = -AW.transpose();
    K.bottomLeftCorner(m, n) = AW;
  }
  Vec rhs = Vec::Zero(n + m);
  rhs.head(n) = -g;
  Eigen::CompleteOrthogonalDecomposition<Mat> cod(K);
  const Vec sol = cod.solve(rhs);
  p = sol.head(n);
  lambda = sol.tail(m);
}

}  // namespace

QpResult solve_inequality_qp(const Mat& G, const Vec& c, const Mat& A, const Vec& b, const Vec& x0,
                             std::size_t max_iterations, double tol) {
  const Eigen::Index n = G.rows(), m = A.rows();
  if (G.cols() != n || c.size() != n || x0.size() != n || (m > 0 && A.cols() != n) || b.size() != m)
    throw InvalidInput("quadratic program dimensions do not match");
  const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  const double feas_tol = 1e-9 * scale;
  if (m > 0 && ((A * x0 - b).minCoeff() < -feas_tol)) throw InvalidInput("starting point is infeasible");

  QpResult r;
  Vec x = x0;
  std::vector<Eigen::Index> W;
  std::vector<bool> in_w(static_cast<std::size_t>(m), false);
  // Start with the active constraints that keep the working rows independent.
  auto rows_of = [&](const std::vector<Eigen::Index>& idx) {
    Mat AW(static_cast<Eigen::Index>(idx.size()), n);
    for (std::size_t k = 0; k < idx.size(); ++k) AW.row(static_cast<Eigen::Index>(k)) = A.row(idx[k]);
    return AW;
  };
  auto independent_with = [&](Eigen::Index i) {
    if (W.empty()) return A.row(i).norm() > 0;
    Mat AW = rows_of(W);
    Mat ext(AW.rows() + 1, n);
    ext << AW, A.row(i);
    Eigen::FullPivLU<Mat> lu(ext);
    lu.setThreshold(1e-10);
    return lu.rank() == ext.rows();
  };
  for (Eigen::Index i = 0; i < m; ++i)
    if (std::abs(A.row(i).dot(x) - b(i)) <= feas_tol && static_cast<Eigen::Index>(W.size()) < n &&
        independent_with(i)) {
      W.push_back(i);
      in_w[static_cast<std::size_t>(i)] = true;
    }

  for (r.iterations = 0; r.iterations < max_iterations; ++r.iterations) {
    const Vec g = G * x + c;
    Vec p, lambda;
    working_step(G, g, rows_of(W), p, lambda);
    // A step counts as zero when it is tiny or buys no measurable decrease; the latter
    // happens along nearly flat directions of a barely positive definite G.
    const double f = 0.5 * x.dot(G * x) + c.dot(x);
    const double gain = -(g.dot(p) + 0.5 * p.dot(G * p));
    if (p.lpNorm<Eigen::Infinity>() <= tol * std::max(1.0, x.lpNorm<Eigen::Infinity>()) ||
        gain <= 1e-15 * std::max(1.0, std::abs(f))) {
      // Drop a negative multiplier, or stop. Bland's rule (lowest constraint index) after
      // many iterations breaks cycling at degenerate vertices.
      const bool bland = r.iterations > 4 * static_cast<std::size_t>(m + n);
      Eigen::Index worst = -1;
      double most = -tol * std::max(1.0, g.lpNorm<Eigen::Infinity>());
      for (Eigen::Index k = 0; k < lambda.size(); ++k) {
        if (lambda(k) >= most) continue;
        if (!bland) {
          most = lambda(k);
          worst = k;
        } else if (worst < 0 || W[static_cast<std::size_t>(k)] < W[static_cast<std::size_t>(worst)]) {
          worst = k;
        }
      }
      if (worst < 0) {
        r.converged = true;
        break;
      }
      in_w[static_cast<std::size_t>(W[static_cast<std::size_t>(worst)])] = false;
      W.erase(W.begin() + worst);
      continue;
    }
    double alpha = 1.0;
    Eigen::Index blocking = -1;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (in_w[static_cast<std::size_t>(i)]) continue;
      const double ap = A.row(i).dot(p);
      if (ap < -1e-12 * p.norm() * A.row(i).norm()) {
        const double step = std::max(0.0, (b(i) - A.row(i).dot(x)) / ap);
        if (step < alpha) {
          alpha = step;
          blocking = i;
        }
      }
    }
    x += alpha * p;
    if (blocking >= 0) {
      if (static_cast<Eigen::Index>(W.size()) < n && independent_with(blocking)) {
        W.push_back(blocking);
        in_w[static_cast<std::size_t>(blocking)] = true;
      } else {
        // Degenerate vertex: the working set must stay independent.
        if (alpha == 0.0) {
          // Swap in the blocking constraint for the oldest dependent row.
          for (std::size_t k = 0; k < W.size(); ++k) {
            std::vector<Eigen::Index> trial = W;
            trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(k));
            trial.push_back(blocking);
            Eigen::FullPivLU<Mat> lu(rows_of(trial));
            lu.setThreshold(1e-10);
            if (lu.rank() == static_cast<Eigen::Index>(trial.size())) {
              in_w[static_cast<std::size_t>(W[k])] = false;
              W = trial;
              in_w[static_cast<std::size_t>(blocking)] = true;
              break;
            }
          }
        }
      }
    }
  }
  r.x = x;
  r.objective = 0.5 * x.dot(G * x) + c.dot(x);
  return r;
}

}  // namespace srf
