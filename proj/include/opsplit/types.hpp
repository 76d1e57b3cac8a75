#pragma once

#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace opsplit {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// Images are stored flattened in row-major order: pixel (r, c) lives at r * cols + c.
template <typename Scalar>
using RowMajorMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using SparseMatrix = Eigen::SparseMatrix<Scalar, Eigen::RowMajor>;

using VectorXd = Vector<double>;
using MatrixXd = Matrix<double>;

// Value returned by indicator functions outside their set. IEEE infinity propagates
// through sums (inf + finite == inf) and compares above every finite value.
template <typename Scalar = double>
inline constexpr Scalar kInfinity = std::numeric_limits<Scalar>::infinity();

template <typename Scalar>
inline bool is_infinite(Scalar v) {
    return std::isinf(v) && v > 0;
}

template <typename Scalar>
inline Eigen::Map<const RowMajorMatrix<Scalar>> as_image(const Vector<Scalar>& v, Eigen::Index rows,
                                                          Eigen::Index cols) {
    return Eigen::Map<const RowMajorMatrix<Scalar>>(v.data(), rows, cols);
}

}  // namespace opsplit
