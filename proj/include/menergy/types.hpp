#pragma once

#include <Eigen/Dense>

namespace menergy {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Upper bound on ambient dimension for the allocation-free pair kernels.
inline constexpr int kMaxAmbientDim = 16;

}  // namespace menergy
