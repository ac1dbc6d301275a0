#pragma once

#include <Eigen/Dense>

#include <cstdint>

namespace mvn {

using Index = Eigen::Index;

inline constexpr double kPi = 3.14159265358979323846;

// Dense row-major types. All model math runs in double; float/uint8 variants
// exist for file payloads.
template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using Grid = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Mat = RowMatrix<double>;
using Vec = Eigen::VectorXd;
using Vector3 = Eigen::Vector3d;
using Matrix3 = Eigen::Matrix3d;
using Matrix34 = Eigen::Matrix<double, 3, 4>;

using GridD = Grid<double>;
using GridF = Grid<float>;
using GridU8 = Grid<uint8_t>;

}  // namespace mvn
