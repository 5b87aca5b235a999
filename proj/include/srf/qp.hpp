#pragma once

#include <cstddef>

#include "srf/linalg.hpp"

namespace srf {

struct QpResult {
  Vec x;
  double objective = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

// min 1/2 x^T G x + c^T x subject to A x = b, G positive definite on the null space of A.
Vec solve_equality_qp(const Mat& G, const Vec& c, const Mat& A, const Vec& b);

// min 1/2 x^T G x + c^T x subject to A x >= b by a primal active-set method.
// G must be positive definite and x0 feasible.
QpResult solve_inequality_qp(const Mat& G, const Vec& c, const Mat& A, const Vec& b, const Vec& x0,
                             std::size_t max_iterations = 5000, double tol = 1e-11);

}  // namespace srf
