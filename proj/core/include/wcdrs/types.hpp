#pragma once

#include <Eigen/Core>

namespace wcdrs {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

}  // namespace wcdrs
