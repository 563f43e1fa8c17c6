#include "bandcov/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bandcov/errors.hpp"

namespace bandcov {

SymmetricMatrix sample_covariance(const DataMatrix& x) {
  const Index n = x.rows();
  const Index p = x.cols();
  if (n < 1 || p < 1) throw InvalidArgument("sample_covariance: empty data matrix");
  const VectorXd mean = x.colwise().mean().transpose();
  const MatrixXd centered = x.rowwise() - mean.transpose();
  MatrixXd lower = MatrixXd::Zero(p, p);
  lower.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose(), 1.0 / static_cast<double>(n));
  SymmetricMatrix s = lower.selfadjointView<Eigen::Lower>();
  return s;
}

SymmetricMatrix banded_covariance(const DataMatrix& x, Index k) {
  return band(sample_covariance(x), k);
}

SymmetricMatrix tapered_covariance(const DataMatrix& x, const TaperSpec& taper) {
  const SymmetricMatrix s = sample_covariance(x);
  return schur_product(s, taper_weights(taper, s.rows()));
}

CholeskyRegressionPath::CholeskyRegressionPath(const SymmetricMatrix& covariance, Index max_k)
    : p_(covariance.rows()), max_k_(max_k) {
  if (max_k < 0) throw InvalidArgument("cholesky path: bandwidth must be nonnegative");
  if (covariance.rows() != covariance.cols()) {
    throw DimensionMismatch("cholesky path: covariance is not square");
  }
  nodes_.resize(static_cast<std::size_t>(p_));
  Index overall = max_k_;

  for (Index j = 0; j < p_; ++j) {
    Node& node = nodes_[static_cast<std::size_t>(j)];
    const Index depth = std::min(max_k_, j);
    node.variance = covariance(j, j);
    node.lower = MatrixXd::Zero(depth, depth);
    node.projected = VectorXd::Zero(depth);

    const double residual_tol = kPivotTolerance * node.variance;
    if (!(node.variance > 0.0)) {
      overall = -1;
      continue;
    }

    // Nearest-first predecessor c is variable j-1-c.
    Index valid = depth;
    double running_max_diag = 0.0;
    double min_pivot = std::numeric_limits<double>::infinity();
    double explained = 0.0;
    for (Index c = 0; c < depth; ++c) {
      const Index vc = j - 1 - c;
      running_max_diag = std::max(running_max_diag, covariance(vc, vc));
      const double pivot = covariance(vc, vc) - node.lower.row(c).head(c).squaredNorm();
      min_pivot = std::min(min_pivot, pivot);
      if (!(min_pivot >= kPivotTolerance * running_max_diag)) {
        valid = c;
        break;
      }
      const double diag = std::sqrt(pivot);
      node.lower(c, c) = diag;
      for (Index r = c + 1; r < depth; ++r) {
        const Index vr = j - 1 - r;
        node.lower(r, c) =
            (covariance(vr, vc) - node.lower.row(r).head(c).dot(node.lower.row(c).head(c))) / diag;
      }
      const double y =
          (covariance(vc, j) - node.lower.row(c).head(c).dot(node.projected.head(c))) / diag;
      node.projected(c) = y;
      explained += y * y;
      if (!(node.variance - explained > residual_tol)) {
        valid = c;
        break;
      }
    }
    // A node that uses all of its predecessors is unaffected by larger k.
    const Index node_valid = (valid == depth && depth < max_k_) ? max_k_ : valid;
    overall = std::min(overall, node_valid);
  }
  max_valid_k_ = overall;
}

BandedCholeskyFactors CholeskyRegressionPath::factors(Index k) const {
  if (k < 0 || k > max_k_) {
    throw InvalidArgument("cholesky path: bandwidth " + std::to_string(k) + " outside [0, " +
                          std::to_string(max_k_) + "]");
  }
  if (k > max_valid_k_) {
    throw SingularDesign("regressor Gram matrix is singular at bandwidth " + std::to_string(k));
  }
  BandedCholeskyFactors f;
  f.k = k;
  f.coefficients = MatrixXd::Zero(p_, p_);
  f.residual_variances.resize(p_);
  for (Index j = 0; j < p_; ++j) {
    const Node& node = nodes_[static_cast<std::size_t>(j)];
    const Index depth = std::min(k, j);
    const VectorXd y = node.projected.head(depth);
    const VectorXd coef =
        node.lower.topLeftCorner(depth, depth).triangularView<Eigen::Lower>().transpose().solve(y);
    for (Index c = 0; c < depth; ++c) f.coefficients(j, j - 1 - c) = coef(c);
    f.residual_variances(j) = node.variance - y.squaredNorm();
  }
  return f;
}

BandedCholeskyFactors fit_banded_cholesky(const DataMatrix& x, Index k) {
  if (k < 0) throw InvalidArgument("fit_banded_cholesky: bandwidth must be nonnegative");
  const Index n = x.rows();
  if (k > n - 2) {
    throw BandwidthTooLarge("bandwidth " + std::to_string(k) + " exceeds n - 2 = " +
                            std::to_string(n - 2));
  }
  const CholeskyRegressionPath path(sample_covariance(x), k);
  return path.factors(k);
}

namespace {

MatrixXd unit_lower(const BandedCholeskyFactors& f) {
  const Index p = f.coefficients.rows();
  return MatrixXd::Identity(p, p) - f.coefficients;
}

void check_factors(const BandedCholeskyFactors& f) {
  if (f.coefficients.rows() != f.coefficients.cols() ||
      f.coefficients.rows() != f.residual_variances.size()) {
    throw DimensionMismatch("cholesky factors: inconsistent dimensions");
  }
  if (!(f.residual_variances.array() > 0.0).all()) {
    throw InvalidArgument("cholesky factors: residual variances must be positive");
  }
}

}  // namespace

SymmetricMatrix factors_to_covariance(const BandedCholeskyFactors& f) {
  check_factors(f);
  const Index p = f.coefficients.rows();
  const MatrixXd t = unit_lower(f);
  // W = (I - A)^-1 D^1/2, covariance = W W^T.
  MatrixXd w = f.residual_variances.cwiseSqrt().asDiagonal();
  t.triangularView<Eigen::UnitLower>().solveInPlace(w);
  MatrixXd lower = MatrixXd::Zero(p, p);
  lower.selfadjointView<Eigen::Lower>().rankUpdate(w);
  SymmetricMatrix cov = lower.selfadjointView<Eigen::Lower>();
  return cov;
}

CholeskyMatrices factors_to_matrices(const BandedCholeskyFactors& f) {
  check_factors(f);
  const MatrixXd t = unit_lower(f);
  const MatrixXd scaled = f.residual_variances.cwiseSqrt().cwiseInverse().asDiagonal() * t;
  CholeskyMatrices out;
  out.precision = symmetrize(scaled.transpose() * scaled);
  out.covariance = factors_to_covariance(f);
  return out;
}

}  // namespace bandcov
