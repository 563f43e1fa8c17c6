#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "bandcov/types.hpp"

namespace bandcov {

enum class ModelKind { MA1, AR1, FGN };

// Stationary covariance models. `parameter` is rho for MA1/AR1 (|rho| < 1)
// and the Hurst exponent H for FGN (0.5 <= H <= 1).
struct CovarianceModel {
  ModelKind kind = ModelKind::MA1;
  double parameter = 0.0;

  static CovarianceModel ma1(double rho);
  static CovarianceModel ar1(double rho);
  static CovarianceModel fgn(double hurst);

  // Covariance at lag d >= 0.
  double lag(Index d) const;
  void validate() const;
};

// "ma1:rho=0.5", "ar1:rho=0.9", "fgn:H=0.7".
CovarianceModel parse_model(std::string_view text);
std::string to_string(const CovarianceModel& model);

SymmetricMatrix build_covariance(const CovarianceModel& model, Index p);

// n rows L z with L the Cholesky factor of sigma and z i.i.d. standard
// normal from Rng(seed), drawn row by row.
DataMatrix sample_gaussian(const SymmetricMatrix& sigma, Index n, std::uint64_t seed);

// Same stream as sample_gaussian, with a precomputed lower Cholesky factor.
DataMatrix sample_gaussian_with_factor(const MatrixXd& lower, Index n, std::uint64_t seed);

}  // namespace bandcov
