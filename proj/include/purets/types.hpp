#pragma once

#include <Eigen/Core>

namespace purets {

using Scalar = double;
using Index = Eigen::Index;

// Row-major so tensor slices and raw checkpoint buffers share one layout.
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixMap = Eigen::Map<Matrix>;
using ConstMatrixMap = Eigen::Map<const Matrix>;

}  // namespace purets
