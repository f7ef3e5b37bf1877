#pragma once

#include <Eigen/Dense>

namespace pathheat {

// Intrinsic dimension is capped so that all small vectors live on the stack.
inline constexpr int kMaxDim = 7;
inline constexpr int kMaxAmbient = kMaxDim + 1;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxAmbient, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor,
                          kMaxAmbient, kMaxAmbient>;

}  // namespace pathheat
