#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bandcov/forecast.hpp"
#include "bandcov/matcore.hpp"
#include "bandcov/selection.hpp"
#include "bandcov/simgen.hpp"

namespace bandcov {

// One simulation benchmark cell. n1 == 0 and an empty k_grid mean "use the
// defaults"; resolved() fills them in.
struct ExperimentSpec {
  CovarianceModel model;
  Index n = 100;
  Index p = 10;
  Index reps = 100;
  Index splits = 50;
  Index n1 = 0;
  std::vector<Index> k_grid;
  EstimatorKind kind = EstimatorKind::Banded;
  Norm norm = Norm::OneOne;
  std::uint64_t seed = 0;

  void validate() const;
  ExperimentSpec resolved() const;
};

// "model=ma1:rho=0.5;n=100;p=10;reps=100;splits=50;n1=auto;k=auto;kind=banded;norm=one_one;seed=1".
// Grids print as "a..b" when contiguous, otherwise as a comma list.
std::string to_string(const ExperimentSpec& spec);
ExperimentSpec parse_experiment_spec(std::string_view text);

std::string format_k_grid(const std::vector<Index>& grid);
std::vector<Index> parse_k_grid(std::string_view text);

struct ReplicationRecord {
  Index rep = 0;
  Index k_hat = 0;
  Index k1 = 0;
  double loss_khat = 0;
  double loss_k0 = 0;
  double loss_k1 = 0;
  double loss_sample = 0;
};

struct MeanSd {
  double mean = 0;
  double sd = 0;  // divisor reps - 1; zero for a single replication
  bool operator==(const MeanSd&) const = default;
};

struct ReportAggregates {
  MeanSd k1, k_hat, k1_minus_khat, loss_khat, loss_k0, loss_k1, loss_sample;
  bool operator==(const ReportAggregates&) const = default;
};

ReportAggregates summarize(const std::vector<ReplicationRecord>& records);

struct ExperimentReport {
  ExperimentSpec spec;  // resolved
  Index k0 = 0;
  std::vector<Index> k_grid;
  std::vector<double> true_risk;  // mean (1,1) loss per grid k over the replications
  RiskCurve first_estimated_risk; // resampling risk of replication 0
  std::vector<ReplicationRecord> records;
  ReportAggregates aggregates;
};

// Replication r draws its data with derive_seed(seed, r) (the same stream
// oracle_k0 uses) and its splits with derive_seed(derive_seed(seed, r), 1).
// Losses are (1,1) distances to the true covariance; k0 is the argmin of the
// mean loss over this same replication set.
ExperimentReport run_simulation_experiment(const ExperimentSpec& spec);

// Throws Error when the stored aggregates differ from the records.
void check_report(const ExperimentReport& report);

void write_records_csv(std::ostream& out, const ExperimentReport& report);
void write_summary_csv(std::ostream& out, const ExperimentReport& report);

struct ParsedRecords {
  std::string spec;
  Index k0 = 0;
  std::vector<ReplicationRecord> records;
};

ParsedRecords parse_records_csv(std::istream& in);

// Two-column `k,risk` file.
void write_curve_csv(std::ostream& out, const std::vector<Index>& grid, const std::vector<double>& values);

enum class ForecastEstimator { Sample, Banded, Tapered, Cholesky };

ForecastEstimator parse_forecast_estimator(std::string_view text);
std::string to_string(ForecastEstimator e);

struct ForecastOptions {
  Index n_train = 0;
  Index split = 0;
  ForecastEstimator estimator = ForecastEstimator::Cholesky;
  std::optional<Index> k;  // empty selects k by resampling risk
  TaperSpec taper;         // used by the tapered estimator
  Index splits = 50;
  Index n1 = 0;
  Norm norm = Norm::OneOne;
  std::uint64_t seed = 0;
};

struct ForecastReport {
  ForecastEstimator estimator = ForecastEstimator::Cholesky;
  Index k = -1;  // bandwidth used, -1 for the sample covariance
  std::optional<SelectionResult> selection;
  Index split = 0;
  Index n_train = 0;
  Index n_test = 0;
  VectorXd errors;           // E_j of the chosen estimator
  VectorXd baseline_errors;  // E_j of the sample covariance

  double mean_error() const { return errors.mean(); }
  double mean_baseline_error() const { return baseline_errors.mean(); }
};

SymmetricMatrix fit_forecast_covariance(const DataMatrix& train, const ForecastOptions& options, Index k);

// Leading n_train rows train, the rest test. Means are training column
// means.
ForecastReport run_forecast_experiment(const DataMatrix& data, const ForecastOptions& options);
ForecastReport run_forecast_experiment(const std::string& counts_path, const ForecastOptions& options,
                                       CountTransform transform = CountTransform::SqrtQuarter);

}  // namespace bandcov
