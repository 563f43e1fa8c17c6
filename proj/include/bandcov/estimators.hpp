#pragma once

#include <vector>

#include "bandcov/matcore.hpp"
#include "bandcov/types.hpp"

namespace bandcov {

// Column-centered covariance with divisor n.
SymmetricMatrix sample_covariance(const DataMatrix& x);

// band(sample_covariance(x), k). Not guaranteed positive definite.
SymmetricMatrix banded_covariance(const DataMatrix& x, Index k);

SymmetricMatrix tapered_covariance(const DataMatrix& x, const TaperSpec& taper);

// Modified Cholesky factors of a k-banded inverse: row j of `coefficients`
// holds the least-squares coefficients of variable j on its k nearest
// predecessors, `residual_variances(j)` the residual variance (divisor n).
struct BandedCholeskyFactors {
  Index k = 0;
  MatrixXd coefficients;         // strictly lower triangular, band width k
  VectorXd residual_variances;   // all > 0
};

BandedCholeskyFactors fit_banded_cholesky(const DataMatrix& x, Index k);

struct CholeskyMatrices {
  SymmetricMatrix precision;   // (I - A)^T D^-1 (I - A)
  SymmetricMatrix covariance;  // (I - A)^-1 D (I - A)^-T
};

CholeskyMatrices factors_to_matrices(const BandedCholeskyFactors& f);

// Covariance half of factors_to_matrices.
SymmetricMatrix factors_to_covariance(const BandedCholeskyFactors& f);

// All nested predecessor regressions up to `max_k` computed from one
// Cholesky factorization of each regressor Gram block (predecessors ordered
// nearest first, so the leading k x k block is the bandwidth-k design).
// `covariance` must be a sample covariance with divisor n.
class CholeskyRegressionPath {
 public:
  CholeskyRegressionPath(const SymmetricMatrix& covariance, Index max_k);

  Index max_k() const { return max_k_; }
  // Largest k <= max_k for which every regression is nonsingular, or -1.
  Index max_valid_k() const { return max_valid_k_; }

  // Throws SingularDesign when k exceeds max_valid_k().
  BandedCholeskyFactors factors(Index k) const;

 private:
  struct Node {
    MatrixXd lower;       // Cholesky factor of the predecessor Gram block
    VectorXd projected;   // lower^-1 * cross covariances
    double variance = 0;  // diagonal entry of the covariance
  };

  Index p_ = 0;
  Index max_k_ = 0;
  Index max_valid_k_ = -1;
  std::vector<Node> nodes_;
};

}  // namespace bandcov
