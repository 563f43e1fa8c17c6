#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "bandcov/errors.hpp"
#include "bandcov/types.hpp"

namespace bandcov {

// Zeroes every entry farther than k from the diagonal. k >= p-1 is the
// identity operation.
template <typename Derived>
Matrix<typename Derived::Scalar> band(const Eigen::MatrixBase<Derived>& m, Index k) {
  if (k < 0) throw InvalidArgument("band: bandwidth must be nonnegative");
  using Scalar = typename Derived::Scalar;
  Matrix<Scalar> out = m;
  const Index p = out.rows();
  for (Index j = 0; j < out.cols(); ++j) {
    for (Index i = 0; i < p; ++i) {
      if (std::abs(i - j) > k) out(i, j) = Scalar(0);
    }
  }
  return out;
}

template <typename DerivedA, typename DerivedB>
Matrix<typename DerivedA::Scalar> schur_product(const Eigen::MatrixBase<DerivedA>& a,
                                                const Eigen::MatrixBase<DerivedB>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionMismatch("schur_product: operands have different dimensions");
  }
  return a.cwiseProduct(b);
}

enum class TaperFamily { BandingIndicator, Triangular, Exponential };

// Weight generator r(i,j) = g(|i-j| / scale). For BandingIndicator the scale
// is the integer bandwidth k and g is the indicator 1(|i-j| <= k). An
// infinite scale for the continuous families gives weight 1 everywhere.
struct TaperSpec {
  TaperFamily family = TaperFamily::BandingIndicator;
  double scale = 0.0;

  static TaperSpec banding(Index k) {
    if (k < 0) throw InvalidArgument("taper: banding width must be nonnegative");
    return {TaperFamily::BandingIndicator, static_cast<double>(k)};
  }
  static TaperSpec triangular(double sigma) {
    if (!(sigma > 0.0)) throw InvalidArgument("taper: triangular scale must be positive");
    return {TaperFamily::Triangular, sigma};
  }
  static TaperSpec exponential(double sigma) {
    if (!(sigma > 0.0)) throw InvalidArgument("taper: exponential scale must be positive");
    return {TaperFamily::Exponential, sigma};
  }

  double weight(Index distance) const {
    const double d = static_cast<double>(distance < 0 ? -distance : distance);
    switch (family) {
      case TaperFamily::BandingIndicator:
        return d <= scale ? 1.0 : 0.0;
      case TaperFamily::Triangular:
        return std::max(0.0, 1.0 - d / scale);
      case TaperFamily::Exponential:
        return std::exp(-d / scale);
    }
    return 0.0;
  }
};

// Parses "banding:k=2", "triangular:sigma=3", "exponential:sigma=1.5".
TaperSpec parse_taper(std::string_view text);
std::string to_string(const TaperSpec& t);

template <typename Scalar = double>
Matrix<Scalar> taper_weights(const TaperSpec& t, Index p) {
  if (p < 1) throw InvalidArgument("taper_weights: dimension must be positive");
  Matrix<Scalar> w(p, p);
  for (Index j = 0; j < p; ++j) {
    for (Index i = 0; i < p; ++i) w(i, j) = static_cast<Scalar>(t.weight(i - j));
  }
  return w;
}

// Sum of the taper over the distinct positive distances 1..p-1.
inline double effective_bandwidth(const TaperSpec& t, Index p) {
  if (p < 1) throw InvalidArgument("effective_bandwidth: dimension must be positive");
  double total = 0.0;
  for (Index l = 1; l < p; ++l) total += t.weight(l);
  return total;
}

enum class Norm { Operator, OneOne, MaxAbs, Frobenius };

Norm parse_norm(std::string_view text);
std::string to_string(Norm n);

template <typename Scalar>
struct EigenDecomposition {
  Vector<Scalar> eigenvalues;   // descending
  Matrix<Scalar> eigenvectors;  // column j pairs with eigenvalues(j)
};

template <typename Derived>
EigenDecomposition<typename Derived::Scalar> sym_eigen(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  if (m.rows() != m.cols()) throw DimensionMismatch("sym_eigen: matrix is not square");
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(m.derived(), Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw Error("sym_eigen: eigensolver failed to converge");
  }
  const Index p = m.rows();
  EigenDecomposition<Scalar> out;
  out.eigenvalues = solver.eigenvalues().reverse();
  out.eigenvectors.resize(p, p);
  for (Index j = 0; j < p; ++j) out.eigenvectors.col(j) = solver.eigenvectors().col(p - 1 - j);
  return out;
}

template <typename Derived>
Vector<typename Derived::Scalar> sym_eigenvalues(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(m.derived(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw Error("sym_eigenvalues: eigensolver failed to converge");
  }
  return solver.eigenvalues().reverse();
}

// Maximum absolute column sum. For symmetric input this is also the
// (inf,inf) norm.
template <typename Derived>
typename Derived::Scalar one_one_norm(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  if (m.size() == 0) return Scalar(0);
  return m.cwiseAbs().colwise().sum().maxCoeff();
}

template <typename Derived>
typename Derived::Scalar matrix_norm(const Eigen::MatrixBase<Derived>& m, Norm which) {
  using Scalar = typename Derived::Scalar;
  if (m.size() == 0) return Scalar(0);
  switch (which) {
    case Norm::Operator:
      return sym_eigenvalues(m).cwiseAbs().maxCoeff();
    case Norm::OneOne:
      return one_one_norm(m);
    case Norm::MaxAbs:
      return m.cwiseAbs().maxCoeff();
    case Norm::Frobenius:
      return m.norm();
  }
  return Scalar(0);
}

inline constexpr double kPivotTolerance = 1e-12;

// Lower-triangular L with m = L L^T. A pivot below 1e-12 times the largest
// diagonal entry of m is treated as a failure.
template <typename Derived>
Matrix<typename Derived::Scalar> cholesky_factor(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  if (m.rows() != m.cols()) throw DimensionMismatch("cholesky_factor: matrix is not square");
  if (m.rows() == 0) return Matrix<Scalar>(0, 0);
  const Scalar max_diag = m.diagonal().maxCoeff();
  if (!(max_diag > Scalar(0))) throw NotPositiveDefinite("matrix is not positive definite");
  const Scalar tol = Scalar(kPivotTolerance) * max_diag;

  Eigen::LLT<Matrix<Scalar>> llt(m.derived());
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("matrix is not positive definite");
  Matrix<Scalar> lower = llt.matrixL();
  for (Index i = 0; i < lower.rows(); ++i) {
    const Scalar pivot = lower(i, i) * lower(i, i);
    if (!(pivot >= tol)) {
      throw NotPositiveDefinite("matrix is not positive definite (pivot " + std::to_string(i) +
                                " below tolerance)");
    }
  }
  return lower;
}

template <typename Derived>
bool is_positive_definite(const Eigen::MatrixBase<Derived>& m) {
  try {
    (void)cholesky_factor(m);
    return true;
  } catch (const NotPositiveDefinite&) {
    return false;
  }
}

template <typename Derived>
Matrix<typename Derived::Scalar> symmetrize(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  return (m + m.transpose()) * Scalar(0.5);
}

}  // namespace bandcov
