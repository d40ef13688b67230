#pragma once

#include <Eigen/Core>

namespace vff {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
/// Row-major by convention of use: one row per sample, one column per axis.
using Matrix = Eigen::MatrixXd;

}  // namespace vff
