#pragma once

#include <Eigen/Dense>

namespace bandcov {

using Index = Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXd = Matrix<double>;
using VectorXd = Vector<double>;

// Dense p x p real symmetric matrix. Symmetry is maintained by construction:
// every routine returning one writes both triangles identically.
using SymmetricMatrix = MatrixXd;

// n x p sample, rows are observations.
using DataMatrix = MatrixXd;

}  // namespace bandcov
