#include "bandcov/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "bandcov/csv.hpp"
#include "bandcov/errors.hpp"
#include "bandcov/estimators.hpp"
#include "bandcov/parallel.hpp"
#include "bandcov/random.hpp"

namespace bandcov {

EstimatorKind parse_estimator_kind(std::string_view text) {
  if (text == "banded") return EstimatorKind::Banded;
  if (text == "cholesky") return EstimatorKind::Cholesky;
  throw ParseError("unknown estimator kind '" + std::string(text) + "' (expected banded or cholesky)");
}

std::string to_string(EstimatorKind kind) {
  return kind == EstimatorKind::Banded ? "banded" : "cholesky";
}

Index default_n1(Index n) { return n / 3; }

Index large_sample_n1(Index n) {
  if (n < 2) return 0;
  const double nn = static_cast<double>(n);
  return static_cast<Index>(std::floor(nn * (1.0 - 1.0 / std::log(nn))));
}

std::vector<Index> default_k_grid(EstimatorKind kind, Index n_fit, Index p) {
  Index top = p - 1;
  if (kind == EstimatorKind::Cholesky) top = std::min(top, n_fit - 2);
  std::vector<Index> grid;
  for (Index k = 0; k <= top; ++k) grid.push_back(k);
  return grid;
}

namespace {

void validate_grid(const std::vector<Index>& grid) {
  if (grid.empty()) throw InvalidArgument("bandwidth grid is empty");
  if (grid.front() < 0) throw InvalidArgument("bandwidth grid contains a negative value");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (grid[i] <= grid[i - 1]) throw InvalidArgument("bandwidth grid must be strictly ascending");
  }
}

void check_cholesky_limit(const std::vector<Index>& grid, Index n_fit) {
  if (grid.back() > n_fit - 2) {
    throw BandwidthTooLarge("bandwidth " + std::to_string(grid.back()) +
                            " exceeds the regression limit n - 2 = " + std::to_string(n_fit - 2));
  }
}

// (1,1) distance between band(estimate, k) and target for every grid k in
// O(p^2). Per column, the in-band |estimate - target| mass is accumulated one
// diagonal at a time and the out-of-band |target| mass comes from suffix sums
// over diagonals, so both parts are exact zeros when they should be.
std::vector<double> banded_one_one_curve(const SymmetricMatrix& estimate, const SymmetricMatrix& target,
                                         const std::vector<Index>& grid) {
  const Index p = estimate.rows();
  // outside(d, j): sum of |target| in column j over diagonals >= d.
  MatrixXd outside = MatrixXd::Zero(p + 1, p);
  for (Index d = p - 1; d >= 0; --d) {
    for (Index j = 0; j < p; ++j) {
      double layer = 0.0;
      if (j - d >= 0) layer += std::abs(target(j - d, j));
      if (d > 0 && j + d < p) layer += std::abs(target(j + d, j));
      outside(d, j) = outside(d + 1, j) + layer;
    }
  }
  VectorXd inside = VectorXd::Zero(p);
  std::vector<double> out;
  out.reserve(grid.size());
  Index added = -1;  // widest diagonal already folded into `inside`
  for (Index k : grid) {
    const Index k_eff = std::min(k, p - 1);
    for (Index d = added + 1; d <= k_eff; ++d) {
      for (Index j = 0; j < p; ++j) {
        if (j - d >= 0) inside(j) += std::abs(estimate(j - d, j) - target(j - d, j));
        if (d > 0 && j + d < p) inside(j) += std::abs(estimate(j + d, j) - target(j + d, j));
      }
    }
    added = std::max(added, k_eff);
    out.push_back((inside + outside.row(k_eff + 1).transpose()).maxCoeff());
  }
  return out;
}

std::size_t argmin_first(const std::vector<double>& values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] < values[best]) best = i;
  }
  return best;
}

MatrixXd take_rows(const DataMatrix& x, const std::vector<Index>& rows) {
  MatrixXd out(static_cast<Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = x.row(rows[i]);
  return out;
}

}  // namespace

std::vector<double> loss_curve(const SymmetricMatrix& fit_covariance, Index n_fit,
                               const SymmetricMatrix& target, const std::vector<Index>& k_grid,
                               EstimatorKind kind, Norm norm) {
  validate_grid(k_grid);
  if (fit_covariance.rows() != target.rows() || fit_covariance.cols() != target.cols()) {
    throw DimensionMismatch("loss_curve: estimate and target have different dimensions");
  }
  if (kind == EstimatorKind::Banded) {
    if (norm == Norm::OneOne) return banded_one_one_curve(fit_covariance, target, k_grid);
    std::vector<double> out;
    out.reserve(k_grid.size());
    for (Index k : k_grid) out.push_back(matrix_norm(band(fit_covariance, k) - target, norm));
    return out;
  }

  check_cholesky_limit(k_grid, n_fit);
  const CholeskyRegressionPath path(fit_covariance, k_grid.back());
  std::vector<double> out;
  out.reserve(k_grid.size());
  for (Index k : k_grid) {
    const SymmetricMatrix estimate = factors_to_covariance(path.factors(k));
    out.push_back(matrix_norm(estimate - target, norm));
  }
  return out;
}

RiskCurve estimate_risk(const DataMatrix& x, const RiskOptions& options) {
  const Index n = x.rows();
  const Index p = x.cols();
  if (n < 4) throw InsufficientData("risk estimation needs at least 4 observations, got " + std::to_string(n));
  if (options.splits < 1) throw InvalidArgument("number of splits must be positive");
  const Index n1 = options.n1 > 0 ? options.n1 : default_n1(n);
  const Index n2 = n - n1;
  if (n1 < 2 || n2 < 2) {
    throw InvalidArgument("split sizes must both be at least 2 (n1=" + std::to_string(n1) +
                          ", n2=" + std::to_string(n2) + ")");
  }

  RiskCurve curve;
  curve.k_grid = options.k_grid.empty() ? default_k_grid(options.kind, n1, p) : options.k_grid;
  validate_grid(curve.k_grid);
  if (options.kind == EstimatorKind::Cholesky) check_cholesky_limit(curve.k_grid, n1);
  curve.kind = options.kind;
  curve.splits = options.splits;
  curve.n1 = n1;
  curve.n2 = n2;
  curve.norm = options.norm;
  curve.seed = options.seed;

  const auto splits = static_cast<std::size_t>(options.splits);
  std::vector<std::vector<double>> per_split(splits);
  parallel_for(splits, [&](std::size_t nu) {
    Rng rng(derive_seed(options.seed, nu));
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    for (Index i = 0; i < n1; ++i) {
      const auto j = i + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n - i)));
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }
    std::vector<Index> first(order.begin(), order.begin() + n1);
    std::vector<Index> second(order.begin() + n1, order.end());
    std::sort(first.begin(), first.end());
    std::sort(second.begin(), second.end());
    const SymmetricMatrix s1 = sample_covariance(take_rows(x, first));
    const SymmetricMatrix s2 = sample_covariance(take_rows(x, second));
    per_split[nu] = loss_curve(s1, n1, s2, curve.k_grid, options.kind, options.norm);
  });

  curve.risk.assign(curve.k_grid.size(), 0.0);
  for (const auto& losses : per_split) {
    for (std::size_t i = 0; i < losses.size(); ++i) curve.risk[i] += losses[i];
  }
  for (double& r : curve.risk) r /= static_cast<double>(splits);
  return curve;
}

SelectionResult select_k(RiskCurve curve) {
  validate_grid(curve.k_grid);
  if (curve.risk.size() != curve.k_grid.size()) {
    throw DimensionMismatch("risk curve: risk and grid lengths differ");
  }
  SelectionResult result;
  result.k_hat = curve.k_grid[argmin_first(curve.risk)];
  result.curve = std::move(curve);
  return result;
}

SelectionResult oracle_k1(const DataMatrix& x, const SymmetricMatrix& truth,
                          const std::vector<Index>& k_grid, EstimatorKind kind, Norm norm) {
  if (truth.rows() != x.cols()) throw DimensionMismatch("oracle_k1: truth dimension differs from data");
  RiskCurve curve;
  curve.k_grid = k_grid.empty() ? default_k_grid(kind, x.rows(), x.cols()) : k_grid;
  curve.kind = kind;
  curve.norm = norm;
  curve.n1 = x.rows();
  curve.risk = loss_curve(sample_covariance(x), x.rows(), truth, curve.k_grid, kind, norm);
  return select_k(std::move(curve));
}

OracleK0 oracle_k0(const CovarianceModel& model, Index n, Index p, const std::vector<Index>& k_grid,
                   Index reps, EstimatorKind kind, Norm norm, std::uint64_t seed) {
  if (reps < 1) throw InvalidArgument("oracle_k0: reps must be at least 1");
  const SymmetricMatrix truth = build_covariance(model, p);
  const MatrixXd lower = cholesky_factor(truth);
  OracleK0 out;
  out.k_grid = k_grid.empty() ? default_k_grid(kind, n, p) : k_grid;
  validate_grid(out.k_grid);

  std::vector<std::vector<double>> curves(static_cast<std::size_t>(reps));
  parallel_for(curves.size(), [&](std::size_t r) {
    const DataMatrix x = sample_gaussian_with_factor(lower, n, derive_seed(seed, r));
    curves[r] = loss_curve(sample_covariance(x), n, truth, out.k_grid, kind, norm);
  });
  out.mean_loss.assign(out.k_grid.size(), 0.0);
  for (const auto& c : curves) {
    for (std::size_t i = 0; i < c.size(); ++i) out.mean_loss[i] += c[i];
  }
  for (double& v : out.mean_loss) v /= static_cast<double>(reps);
  out.k0 = out.k_grid[argmin_first(out.mean_loss)];
  return out;
}

Index theoretical_bandwidth(Index n, Index p, double alpha) {
  if (n < 2 || p < 2 || !(alpha > 0.0)) {
    throw InvalidArgument("theoretical_bandwidth: need n >= 2, p >= 2 and alpha > 0");
  }
  const double base = std::log(static_cast<double>(p)) / static_cast<double>(n);
  const double value = std::pow(base, -1.0 / (2.0 * (alpha + 1.0)));
  return std::max<Index>(1, static_cast<Index>(std::llround(value)));
}

void write_risk_curve_csv(std::ostream& out, const SelectionResult& result) {
  out << "k,risk\n";
  for (std::size_t i = 0; i < result.curve.k_grid.size(); ++i) {
    out << result.curve.k_grid[i] << ',' << format_double(result.curve.risk[i]) << '\n';
  }
  out << "# k_hat=" << result.k_hat << '\n';
}

}  // namespace bandcov
