#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

#include "bandcov/types.hpp"

namespace bandcov {

// Mean and covariance split into the leading `split` coordinates (block 1)
// and the remaining p - split (block 2).
struct PartitionedMoments {
  Index split = 0;
  VectorXd mu1;
  VectorXd mu2;
  MatrixXd s11;
  MatrixXd s12;
  MatrixXd s21;
  MatrixXd s22;
};

PartitionedMoments partition_moments(const VectorXd& mu, const SymmetricMatrix& sigma, Index split);

// Best linear predictor mu2 + S21 S11^-1 (x1 - mu1). S11 is factored once.
class SecondHalfPredictor {
 public:
  explicit SecondHalfPredictor(PartitionedMoments moments);

  VectorXd predict(const VectorXd& x1) const;
  // One prediction per row of `first_halves`.
  MatrixXd predict_rows(const MatrixXd& first_halves) const;
  // B = S21 S11^-1.
  const MatrixXd& coefficients() const { return coefficients_; }

 private:
  PartitionedMoments moments_;
  MatrixXd coefficients_;
};

VectorXd predict_second_half(const PartitionedMoments& moments, const VectorXd& x1);

// Mean absolute error per column.
VectorXd forecast_error(const MatrixXd& predictions, const MatrixXd& actuals);

enum class CountTransform { SqrtQuarter, None };

CountTransform parse_count_transform(std::string_view text);

// Nonnegative integer counts, rows = days. A non-numeric first row is
// treated as a header and skipped.
MatrixXd read_counts_csv(const std::string& path);
DataMatrix transform_counts(const MatrixXd& counts, CountTransform transform);
DataMatrix ingest_counts(const std::string& path, CountTransform transform);

// Header `j,E_j`; j is the 1-based coordinate index in the full vector.
void write_forecast_csv(std::ostream& out, const VectorXd& errors, Index split);

}  // namespace bandcov
