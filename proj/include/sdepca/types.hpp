#pragma once

#include <Eigen/Dense>

namespace sdepca {

/// Largest state / noise dimension supported. States and coefficient
/// matrices live in fixed-capacity storage so the inner integration loops
/// never touch the heap.
inline constexpr int kMaxDim = 8;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;

/// d×r diffusion values and d×d Jacobians, row-major.
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor, kMaxDim, kMaxDim>;

using VectorD = Vector<double>;
using MatrixD = Matrix<double>;

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& v) {
    return v.allFinite();
}

}  // namespace sdepca
