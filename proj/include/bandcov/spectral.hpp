#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "bandcov/csv.hpp"
#include "bandcov/errors.hpp"
#include "bandcov/matcore.hpp"

namespace bandcov {

inline constexpr double kSpectralGapTolerance = 1e-8;

// Leading-eigenpair proximity between an estimate and the true covariance.
template <typename Scalar>
struct EigenComparison {
  Index m = 0;
  Vector<Scalar> lambda_true;        // top m, descending
  Vector<Scalar> lambda_estimate;    // top m, descending
  Vector<Scalar> eigenvalue_errors;  // |lambda_j(estimate) - lambda_j(truth)|
  Vector<Scalar> projection_errors;  // ||v^_j v^_j^T - v_j v_j^T||, in [0, 1]
  Scalar gap = Scalar(0);            // smallest consecutive gap among the top m+1 true eigenvalues
};

// Operator norm of the difference of the rank-one projectors onto two unit
// vectors. The difference has eigenvalues +-sin(theta), so the norm is
// sqrt(1 - cos^2(theta)) once the sign is aligned.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar projector_distance(const Eigen::MatrixBase<DerivedA>& u,
                                             const Eigen::MatrixBase<DerivedB>& v) {
  using Scalar = typename DerivedA::Scalar;
  Scalar c = u.dot(v);
  if (c < Scalar(0)) c = -c;
  return std::sqrt(std::max(Scalar(0), Scalar(1) - c * c));
}

template <typename DerivedA, typename DerivedB>
EigenComparison<typename DerivedA::Scalar> eigen_compare(const Eigen::MatrixBase<DerivedA>& estimate,
                                                         const Eigen::MatrixBase<DerivedB>& truth,
                                                         Index m) {
  using Scalar = typename DerivedA::Scalar;
  const Index p = truth.rows();
  if (estimate.rows() != p || estimate.cols() != p || truth.cols() != p) {
    throw DimensionMismatch("eigen_compare: estimate and truth have different dimensions");
  }
  if (m < 1 || m > p) throw InvalidArgument("eigen_compare: m must lie in [1, p]");

  const auto est = sym_eigen(estimate);
  const auto tru = sym_eigen(truth);

  EigenComparison<Scalar> out;
  out.m = m;
  out.gap = std::numeric_limits<Scalar>::infinity();
  const Index top = std::min(m + 1, p);
  for (Index j = 0; j + 1 < top; ++j) {
    out.gap = std::min(out.gap, tru.eigenvalues(j) - tru.eigenvalues(j + 1));
  }
  if (out.gap < Scalar(kSpectralGapTolerance)) {
    throw SpectralDegeneracy("leading true eigenvalues are not separated (gap " +
                             format_double(static_cast<double>(out.gap)) + ")");
  }

  out.lambda_true = tru.eigenvalues.head(m);
  out.lambda_estimate = est.eigenvalues.head(m);
  out.eigenvalue_errors = (out.lambda_estimate - out.lambda_true).cwiseAbs();
  out.projection_errors.resize(m);
  for (Index j = 0; j < m; ++j) {
    out.projection_errors(j) = projector_distance(est.eigenvectors.col(j), tru.eigenvectors.col(j));
  }
  return out;
}

// Fraction of total variance carried by the top m eigenvalues.
template <typename Derived>
typename Derived::Scalar variance_captured(const Eigen::MatrixBase<Derived>& truth, Index m) {
  using Scalar = typename Derived::Scalar;
  const Index p = truth.rows();
  if (m < 1 || m > p) throw InvalidArgument("variance_captured: m must lie in [1, p]");
  const Vector<Scalar> lambda = sym_eigenvalues(truth);
  const Scalar total = lambda.sum();
  if (!(total > Scalar(0))) throw ZeroTrace("variance_captured: trace is not positive");
  const Scalar tail = lambda.tail(p - m).sum();
  return Scalar(1) - tail / total;
}

// Header `j,lambda_true,lambda_est,abs_err,proj_err`, j is 1-based.
template <typename Scalar>
void write_eigen_report_csv(std::ostream& out, const EigenComparison<Scalar>& cmp) {
  out << "j,lambda_true,lambda_est,abs_err,proj_err\n";
  for (Index j = 0; j < cmp.m; ++j) {
    out << (j + 1) << ',' << format_double(cmp.lambda_true(j)) << ','
        << format_double(cmp.lambda_estimate(j)) << ',' << format_double(cmp.eigenvalue_errors(j))
        << ',' << format_double(cmp.projection_errors(j)) << '\n';
  }
}

}  // namespace bandcov
