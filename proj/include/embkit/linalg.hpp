#pragma once

#include <Eigen/Dense>

namespace embkit {

// Row-major so that one embedding row is a contiguous block of doubles.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

}  // namespace embkit
