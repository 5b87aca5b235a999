#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace srf {

struct TransportSolution {
  Eigen::MatrixXd plan;  // supply.size() x demand.size()
  double cost = 0.0;
  std::size_t pivots = 0;
};

// Balanced transportation problem min <cost, plan> with row sums = supply and
// column sums = demand, solved by the primal network simplex on the bipartite
// spanning-tree basis. Totals must agree within 1e-10.
TransportSolution solve_transport(const std::vector<double>& supply, const std::vector<double>& demand,
                                  const Eigen::MatrixXd& cost);

}  // namespace srf
