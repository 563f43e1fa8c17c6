#include "bandcov/forecast.hpp"

#include <cmath>
#include <fstream>
#include <ostream>

#include "bandcov/csv.hpp"
#include "bandcov/errors.hpp"
#include "bandcov/matcore.hpp"

namespace bandcov {

PartitionedMoments partition_moments(const VectorXd& mu, const SymmetricMatrix& sigma, Index split) {
  const Index p = sigma.rows();
  if (sigma.cols() != p || mu.size() != p) {
    throw DimensionMismatch("partition_moments: mean and covariance dimensions disagree");
  }
  if (split < 1 || split >= p) {
    throw InvalidArgument("partition_moments: split " + std::to_string(split) + " outside [1, " +
                          std::to_string(p - 1) + "]");
  }
  const Index rest = p - split;
  PartitionedMoments pm;
  pm.split = split;
  pm.mu1 = mu.head(split);
  pm.mu2 = mu.tail(rest);
  pm.s11 = sigma.topLeftCorner(split, split);
  pm.s12 = sigma.topRightCorner(split, rest);
  pm.s21 = pm.s12.transpose();
  pm.s22 = sigma.bottomRightCorner(rest, rest);
  return pm;
}

SecondHalfPredictor::SecondHalfPredictor(PartitionedMoments moments) : moments_(std::move(moments)) {
  MatrixXd lower;
  try {
    lower = cholesky_factor(moments_.s11);
  } catch (const NotPositiveDefinite&) {
    throw SingularBlock(
        "leading covariance block is singular or indefinite; plug in a regularized covariance estimate "
        "(banded, tapered or cholesky) instead of the sample covariance");
  }
  // B S11 = S21  <=>  S11 B^T = S12.
  MatrixXd bt = lower.triangularView<Eigen::Lower>().solve(moments_.s12);
  lower.transpose().triangularView<Eigen::Upper>().solveInPlace(bt);
  coefficients_ = bt.transpose();
}

VectorXd SecondHalfPredictor::predict(const VectorXd& x1) const {
  if (x1.size() != moments_.split) throw DimensionMismatch("predict: first-half length mismatch");
  return moments_.mu2 + coefficients_ * (x1 - moments_.mu1);
}

MatrixXd SecondHalfPredictor::predict_rows(const MatrixXd& first_halves) const {
  if (first_halves.cols() != moments_.split) throw DimensionMismatch("predict: first-half width mismatch");
  const MatrixXd centered = first_halves.rowwise() - moments_.mu1.transpose();
  MatrixXd out = centered * coefficients_.transpose();
  out.rowwise() += moments_.mu2.transpose();
  return out;
}

VectorXd predict_second_half(const PartitionedMoments& moments, const VectorXd& x1) {
  return SecondHalfPredictor(moments).predict(x1);
}

VectorXd forecast_error(const MatrixXd& predictions, const MatrixXd& actuals) {
  if (predictions.rows() != actuals.rows() || predictions.cols() != actuals.cols()) {
    throw DimensionMismatch("forecast_error: predictions and actuals differ in shape");
  }
  if (predictions.rows() < 1) throw InvalidArgument("forecast_error: need at least one test row");
  return (predictions - actuals).cwiseAbs().colwise().mean().transpose();
}

CountTransform parse_count_transform(std::string_view text) {
  if (text == "sqrt_quarter") return CountTransform::SqrtQuarter;
  if (text == "none") return CountTransform::None;
  throw ParseError("unknown count transform '" + std::string(text) + "'");
}

MatrixXd read_counts_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  const auto rows = parse_csv_rows(in, true);
  if (rows.empty()) throw ParseError("'" + path + "' holds no count rows");
  MatrixXd counts(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < counts.rows(); ++i) {
    for (Index j = 0; j < counts.cols(); ++j) {
      const double v = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      if (v < 0.0) {
        throw ParseError("negative count at row " + std::to_string(i + 1) + ", column " +
                         std::to_string(j + 1));
      }
      if (std::floor(v) != v) {
        throw ParseError("non-integer count at row " + std::to_string(i + 1) + ", column " +
                         std::to_string(j + 1));
      }
      counts(i, j) = v;
    }
  }
  return counts;
}

DataMatrix transform_counts(const MatrixXd& counts, CountTransform transform) {
  if ((counts.array() < 0.0).any()) throw InvalidArgument("transform_counts: negative count");
  if (transform == CountTransform::None) return counts;
  return (counts.array() + 0.25).sqrt().matrix();
}

DataMatrix ingest_counts(const std::string& path, CountTransform transform) {
  return transform_counts(read_counts_csv(path), transform);
}

void write_forecast_csv(std::ostream& out, const VectorXd& errors, Index split) {
  out << "j,E_j\n";
  for (Index j = 0; j < errors.size(); ++j) {
    out << (split + j + 1) << ',' << format_double(errors(j)) << '\n';
  }
}

}  // namespace bandcov
