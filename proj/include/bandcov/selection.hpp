#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "bandcov/matcore.hpp"
#include "bandcov/simgen.hpp"
#include "bandcov/types.hpp"

namespace bandcov {

enum class EstimatorKind { Banded, Cholesky };

EstimatorKind parse_estimator_kind(std::string_view text);
std::string to_string(EstimatorKind kind);

struct RiskCurve {
  std::vector<Index> k_grid;  // strictly ascending
  std::vector<double> risk;   // one value per grid point
  EstimatorKind kind = EstimatorKind::Banded;
  Index splits = 0;
  Index n1 = 0;
  Index n2 = 0;
  Norm norm = Norm::OneOne;
  std::uint64_t seed = 0;
};

struct SelectionResult {
  Index k_hat = 0;
  RiskCurve curve;
};

// floor(n / 3).
Index default_n1(Index n);
// floor(n (1 - 1 / log n)); an alternative split size for large n.
Index large_sample_n1(Index n);

// 0..p-1 for the banded estimator, 0..min(p-1, n_fit-2) for Cholesky
// banding, where n_fit is the number of rows the estimator is fitted on.
std::vector<Index> default_k_grid(EstimatorKind kind, Index n_fit, Index p);

struct RiskOptions {
  std::vector<Index> k_grid;  // empty selects default_k_grid(kind, n1, p)
  EstimatorKind kind = EstimatorKind::Banded;
  Index splits = 50;
  Index n1 = 0;  // 0 selects default_n1(n)
  Norm norm = Norm::OneOne;
  std::uint64_t seed = 0;
};

// Distance between the estimator fitted from `fit_covariance` (a divisor-n
// sample covariance of n_fit rows) at each grid bandwidth and `target`.
std::vector<double> loss_curve(const SymmetricMatrix& fit_covariance, Index n_fit,
                               const SymmetricMatrix& target, const std::vector<Index>& k_grid,
                               EstimatorKind kind, Norm norm);

// Resampling risk: average over random splits of the distance between the
// estimator fitted on n1 rows and the sample covariance of the other n2.
// Split nu draws its partition from Rng(derive_seed(seed, nu)).
RiskCurve estimate_risk(const DataMatrix& x, const RiskOptions& options);

// Smallest k attaining the minimum risk.
SelectionResult select_k(RiskCurve curve);

SelectionResult oracle_k1(const DataMatrix& x, const SymmetricMatrix& truth,
                          const std::vector<Index>& k_grid, EstimatorKind kind,
                          Norm norm = Norm::OneOne);

struct OracleK0 {
  Index k0 = 0;
  std::vector<Index> k_grid;
  std::vector<double> mean_loss;
};

// Monte Carlo risk over `reps` datasets; dataset r is
// sample_gaussian(build_covariance(model, p), n, derive_seed(seed, r)).
OracleK0 oracle_k0(const CovarianceModel& model, Index n, Index p, const std::vector<Index>& k_grid,
                   Index reps, EstimatorKind kind, Norm norm, std::uint64_t seed);

// round((log p / n)^(-1 / (2 (alpha + 1)))), at least 1.
Index theoretical_bandwidth(Index n, Index p, double alpha);

// Header `k,risk`, one row per grid point, then `# k_hat=<value>`.
void write_risk_curve_csv(std::ostream& out, const SelectionResult& result);

}  // namespace bandcov
