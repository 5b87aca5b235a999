#pragma once

#include <Eigen/Dense>

namespace srf {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

}  // namespace srf
