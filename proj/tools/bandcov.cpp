#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bandcov/csv.hpp"
#include "bandcov/errors.hpp"
#include "bandcov/estimators.hpp"
#include "bandcov/experiment.hpp"
#include "bandcov/forecast.hpp"
#include "bandcov/selection.hpp"
#include "bandcov/simgen.hpp"
#include "bandcov/spectral.hpp"

namespace fs = std::filesystem;
using namespace bandcov;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  return out;
}

// Writes to `path`, or stdout when path is empty or "-".
template <typename Fn>
void emit(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
  } else {
    auto out = open_output(path);
    fn(out);
  }
}

struct SimulateArgs {
  std::string model;
  Index p = 0;
  Index n = 0;
  std::uint64_t seed = 0;
  std::string out;
};

int run_simulate(const SimulateArgs& a) {
  const auto model = parse_model(a.model);
  const SymmetricMatrix sigma = build_covariance(model, a.p);
  const MatrixXd result = a.n > 0 ? sample_gaussian(sigma, a.n, a.seed) : sigma;
  emit(a.out, [&](std::ostream& os) { write_matrix_csv(os, result); });
  return 0;
}

struct EstimateArgs {
  std::string data;
  std::string estimator;
  std::optional<Index> k;
  std::string taper;
  std::string precision_out;
  std::uint64_t seed = 0;
  std::string out;
};

int run_estimate(const EstimateArgs& a) {
  const DataMatrix x = read_data_csv(a.data);
  const auto kind = parse_forecast_estimator(a.estimator);
  if ((kind == ForecastEstimator::Banded || kind == ForecastEstimator::Cholesky) && !a.k) {
    throw UsageError("--k is required for the " + a.estimator + " estimator");
  }
  if (kind == ForecastEstimator::Tapered && a.taper.empty()) {
    throw UsageError("--taper is required for the tapered estimator");
  }
  if (!a.precision_out.empty() && kind != ForecastEstimator::Cholesky) {
    throw UsageError("--precision-out is only available for the cholesky estimator");
  }
  SymmetricMatrix estimate;
  if (kind == ForecastEstimator::Cholesky) {
    const auto m = factors_to_matrices(fit_banded_cholesky(x, *a.k));
    estimate = m.covariance;
    if (!a.precision_out.empty()) emit(a.precision_out, [&](std::ostream& os) { write_matrix_csv(os, m.precision); });
  } else {
    ForecastOptions options;
    options.estimator = kind;
    if (!a.taper.empty()) options.taper = parse_taper(a.taper);
    estimate = fit_forecast_covariance(x, options, a.k.value_or(0));
  }
  emit(a.out, [&](std::ostream& os) { write_matrix_csv(os, estimate); });
  return 0;
}

struct SelectArgs {
  std::string data;
  std::string kind = "banded";
  Index splits = 50;
  Index n1 = 0;
  bool large_n1 = false;
  std::string norm = "one_one";
  std::string grid = "auto";
  std::uint64_t seed = 0;
  std::string out;
};

int run_select(const SelectArgs& a) {
  const DataMatrix x = read_data_csv(a.data);
  RiskOptions options;
  options.kind = parse_estimator_kind(a.kind);
  options.splits = a.splits;
  options.n1 = a.large_n1 ? large_sample_n1(x.rows()) : a.n1;
  options.norm = parse_norm(a.norm);
  options.k_grid = parse_k_grid(a.grid);
  options.seed = a.seed;
  const auto result = select_k(estimate_risk(x, options));
  emit(a.out, [&](std::ostream& os) { write_risk_curve_csv(os, result); });
  return 0;
}

struct BenchArgs {
  int table = 0;
  std::string model;
  std::vector<Index> p;
  Index n = 100;
  Index reps = 100;
  Index splits = 50;
  Index n1 = 0;
  std::string kind = "banded";
  std::string norm = "one_one";
  std::string grid = "auto";
  std::uint64_t seed = 0;
  std::string out_dir;
};

std::vector<CovarianceModel> table_models(int table) {
  switch (table) {
    case 1:
      return {CovarianceModel::ma1(0.5)};
    case 2:
      return {CovarianceModel::ar1(0.1), CovarianceModel::ar1(0.5), CovarianceModel::ar1(0.9)};
    case 3:
      return {CovarianceModel::fgn(0.5), CovarianceModel::fgn(0.7), CovarianceModel::fgn(0.9)};
    default:
      throw UsageError("--table must be 1, 2 or 3");
  }
}

std::string cell_name(const CovarianceModel& m, Index p) {
  std::string name = "p" + std::to_string(p) + "_" + to_string(m);
  for (char& c : name) {
    if (c == ':' || c == '=') c = '_';
  }
  return name;
}

void write_cell(const fs::path& dir, const ExperimentReport& report) {
  fs::create_directories(dir);
  {
    auto out = open_output(dir / "records.csv");
    write_records_csv(out, report);
  }
  {
    auto out = open_output(dir / "summary.csv");
    write_summary_csv(out, report);
  }
  {
    auto out = open_output(dir / "true_risk.csv");
    write_curve_csv(out, report.k_grid, report.true_risk);
  }
  {
    auto out = open_output(dir / "estimated_risk.csv");
    write_curve_csv(out, report.first_estimated_risk.k_grid, report.first_estimated_risk.risk);
  }
}

int run_bench(const BenchArgs& a) {
  std::vector<CovarianceModel> models;
  if (a.table != 0) {
    if (!a.model.empty()) throw UsageError("--table and --model are mutually exclusive");
    models = table_models(a.table);
  } else {
    if (a.model.empty()) throw UsageError("bench needs --table or --model");
    models = {parse_model(a.model)};
  }
  std::vector<Index> dims = a.p;
  if (dims.empty()) {
    if (a.table == 0) throw UsageError("--p is required with --model");
    dims = {10, 100, 200};
  }

  const fs::path root(a.out_dir);
  fs::create_directories(root);
  auto table = open_output(root / "table.csv");
  table << "p,model,k0,k1_mean,k1_sd,khat_mean,khat_sd,k1_minus_khat_mean,k1_minus_khat_sd,"
           "loss_khat,loss_k0,loss_k1,loss_sample\n";

  for (Index p : dims) {
    std::ofstream k0_ratio, khat_ratio;
    if (models.size() > 1) {
      k0_ratio = open_output(root / ("k0_ratio_p" + std::to_string(p) + ".csv"));
      khat_ratio = open_output(root / ("khat_ratio_p" + std::to_string(p) + ".csv"));
      k0_ratio << "param,k0_over_p\n";
      khat_ratio << "param,khat_over_p\n";
    }
    for (const auto& model : models) {
      ExperimentSpec spec;
      spec.model = model;
      spec.n = a.n;
      spec.p = p;
      spec.reps = a.reps;
      spec.splits = a.splits;
      spec.n1 = a.n1;
      spec.k_grid = parse_k_grid(a.grid);
      spec.kind = parse_estimator_kind(a.kind);
      spec.norm = parse_norm(a.norm);
      spec.seed = a.seed;
      const auto report = run_simulation_experiment(spec);
      write_cell(root / cell_name(model, p), report);

      const auto& g = report.aggregates;
      table << p << ',' << to_string(model) << ',' << report.k0 << ',' << format_double(g.k1.mean) << ','
            << format_double(g.k1.sd) << ',' << format_double(g.k_hat.mean) << ',' << format_double(g.k_hat.sd)
            << ',' << format_double(g.k1_minus_khat.mean) << ',' << format_double(g.k1_minus_khat.sd) << ','
            << format_double(g.loss_khat.mean) << ',' << format_double(g.loss_k0.mean) << ','
            << format_double(g.loss_k1.mean) << ',' << format_double(g.loss_sample.mean) << '\n';
      if (models.size() > 1) {
        const double dp = static_cast<double>(p);
        k0_ratio << format_double(model.parameter) << ',' << format_double(static_cast<double>(report.k0) / dp)
                 << '\n';
        khat_ratio << format_double(model.parameter) << ',' << format_double(g.k_hat.mean / dp) << '\n';
      }
      std::cout << "p=" << p << ' ' << to_string(model) << " k0=" << report.k0 << " k1=" << g.k1.mean << " ("
                << g.k1.sd << ") k_hat=" << g.k_hat.mean << " (" << g.k_hat.sd << ") loss: k_hat=" << g.loss_khat.mean
                << " k0=" << g.loss_k0.mean << " k1=" << g.loss_k1.mean << " sample=" << g.loss_sample.mean << '\n';
    }
  }
  return 0;
}

struct PredictArgs {
  std::string counts;
  std::string transform = "sqrt_quarter";
  Index n_train = 0;
  Index split = 0;
  std::string estimator = "cholesky";
  std::string k = "auto";
  std::string taper;
  Index splits = 50;
  Index n1 = 0;
  std::string norm = "one_one";
  std::uint64_t seed = 0;
  std::string out_dir;
};

int run_predict(const PredictArgs& a) {
  ForecastOptions options;
  options.n_train = a.n_train;
  options.split = a.split;
  options.estimator = parse_forecast_estimator(a.estimator);
  if (a.k != "auto") {
    try {
      options.k = std::stoll(a.k);
    } catch (const std::exception&) {
      throw UsageError("--k must be 'auto' or a nonnegative integer");
    }
  }
  if (options.estimator == ForecastEstimator::Tapered) {
    if (a.taper.empty()) throw UsageError("--taper is required for the tapered estimator");
    options.taper = parse_taper(a.taper);
  }
  options.splits = a.splits;
  options.n1 = a.n1;
  options.norm = parse_norm(a.norm);
  options.seed = a.seed;

  const auto report = run_forecast_experiment(a.counts, options, parse_count_transform(a.transform));
  const fs::path root(a.out_dir);
  fs::create_directories(root);
  {
    auto out = open_output(root / ("forecast_" + to_string(report.estimator) + ".csv"));
    write_forecast_csv(out, report.errors, report.split);
  }
  {
    auto out = open_output(root / "forecast_sample.csv");
    write_forecast_csv(out, report.baseline_errors, report.split);
  }
  if (report.selection) {
    auto out = open_output(root / "selection.csv");
    write_risk_curve_csv(out, *report.selection);
  }
  std::cout << "estimator=" << to_string(report.estimator) << " k=" << report.k
            << " mean_E=" << report.mean_error() << " baseline_mean_E=" << report.mean_baseline_error() << '\n';
  return 0;
}

struct EigenArgs {
  std::string estimate;
  std::string truth;
  Index m = 1;
  std::uint64_t seed = 0;
  std::string out;
};

int run_eigen(const EigenArgs& a) {
  const SymmetricMatrix est = read_symmetric_csv(a.estimate);
  const SymmetricMatrix truth = read_symmetric_csv(a.truth);
  const auto cmp = eigen_compare(est, truth, a.m);
  emit(a.out, [&](std::ostream& os) { write_eigen_report_csv(os, cmp); });
  std::cerr << "variance captured by top " << a.m << ": " << variance_captured(truth, a.m) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Banded, tapered and Cholesky-banded covariance estimation"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Emit a model covariance, or sampled data with --n");
  simulate->add_option("--model", sim.model, "ma1:rho=R, ar1:rho=R or fgn:H=H")->required();
  simulate->add_option("--p", sim.p, "Dimension")->required()->check(CLI::PositiveNumber);
  simulate->add_option("--n", sim.n, "Rows to sample; omit to emit the covariance");
  simulate->add_option("--seed", sim.seed, "Master seed")->required();
  simulate->add_option("--out", sim.out, "Output CSV (default stdout)");

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "Fit one estimator to a data CSV");
  estimate->add_option("--data", est.data, "n x p data CSV")->required()->check(CLI::ExistingFile);
  estimate->add_option("--estimator", est.estimator, "sample, banded, tapered or cholesky")->required();
  estimate->add_option("--k", est.k, "Bandwidth");
  estimate->add_option("--taper", est.taper, "banding:k=K, triangular:sigma=S or exponential:sigma=S");
  estimate->add_option("--precision-out", est.precision_out, "Also write the cholesky precision matrix");
  estimate->add_option("--seed", est.seed, "Master seed")->required();
  estimate->add_option("--out", est.out, "Output CSV (default stdout)");

  SelectArgs sel;
  auto* select = app.add_subcommand("select", "Resampling risk curve and selected bandwidth");
  select->add_option("--data", sel.data, "n x p data CSV")->required()->check(CLI::ExistingFile);
  select->add_option("--kind", sel.kind, "banded or cholesky");
  select->add_option("--splits", sel.splits, "Number of random splits");
  select->add_option("--n1", sel.n1, "First split size (default n/3)");
  select->add_flag("--large-sample-n1", sel.large_n1, "Use n1 = n(1 - 1/log n)");
  select->add_option("--norm", sel.norm, "one_one, operator, max_abs or frobenius");
  select->add_option("--k-grid", sel.grid, "auto, a..b or a comma list");
  select->add_option("--seed", sel.seed, "Master seed")->required();
  select->add_option("--out", sel.out, "Output CSV (default stdout)");

  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench", "Simulation benchmark tables and risk curves");
  bench->add_option("--table", bench_args.table, "Preset table 1 (MA1), 2 (AR1) or 3 (FGN)");
  bench->add_option("--model", bench_args.model, "Single model instead of a preset table");
  bench->add_option("--p", bench_args.p, "Dimensions (default 10,100,200 for tables)")->delimiter(',');
  bench->add_option("--n", bench_args.n, "Sample size");
  bench->add_option("--reps", bench_args.reps, "Replications");
  bench->add_option("--splits", bench_args.splits, "Random splits per replication");
  bench->add_option("--n1", bench_args.n1, "First split size (default n/3)");
  bench->add_option("--kind", bench_args.kind, "banded or cholesky");
  bench->add_option("--norm", bench_args.norm, "Norm for the resampling risk");
  bench->add_option("--k-grid", bench_args.grid, "auto, a..b or a comma list");
  bench->add_option("--seed", bench_args.seed, "Master seed")->required();
  bench->add_option("--out-dir", bench_args.out_dir, "Output directory")->required();

  PredictArgs pred;
  auto* predict = app.add_subcommand("predict", "Forecast the second half of each test row from the first");
  predict->add_option("--counts", pred.counts, "Counts CSV, rows = days")->required()->check(CLI::ExistingFile);
  predict->add_option("--transform", pred.transform, "sqrt_quarter or none");
  predict->add_option("--n-train", pred.n_train, "Leading rows used for training")->required();
  predict->add_option("--split", pred.split, "Size of the observed first half")->required();
  predict->add_option("--estimator", pred.estimator, "sample, banded, tapered or cholesky");
  predict->add_option("--k", pred.k, "Bandwidth or 'auto'");
  predict->add_option("--taper", pred.taper, "Taper for the tapered estimator");
  predict->add_option("--splits", pred.splits, "Random splits for automatic k");
  predict->add_option("--n1", pred.n1, "First split size for automatic k");
  predict->add_option("--norm", pred.norm, "Norm for the resampling risk");
  predict->add_option("--seed", pred.seed, "Master seed")->required();
  predict->add_option("--out-dir", pred.out_dir, "Output directory")->required();

  EigenArgs eig;
  auto* eigen = app.add_subcommand("eigen", "Compare leading eigenpairs of an estimate and the truth");
  eigen->add_option("--estimate", eig.estimate, "Estimated covariance CSV")->required()->check(CLI::ExistingFile);
  eigen->add_option("--truth", eig.truth, "True covariance CSV")->required()->check(CLI::ExistingFile);
  eigen->add_option("--m", eig.m, "Number of leading eigenpairs")->required();
  eigen->add_option("--seed", eig.seed, "Master seed")->required();
  eigen->add_option("--out", eig.out, "Output CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*simulate) return run_simulate(sim);
    if (*estimate) return run_estimate(est);
    if (*select) return run_select(sel);
    if (*bench) return run_bench(bench_args);
    if (*predict) return run_predict(pred);
    if (*eigen) return run_eigen(eig);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
