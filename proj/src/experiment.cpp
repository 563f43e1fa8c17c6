#include "bandcov/experiment.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "bandcov/csv.hpp"
#include "bandcov/errors.hpp"
#include "bandcov/estimators.hpp"
#include "bandcov/parallel.hpp"
#include "bandcov/random.hpp"

namespace bandcov {

namespace {

template <typename T>
T parse_number(std::string_view text, std::string_view what) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParseError("invalid " + std::string(what) + " '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  while (true) {
    const auto pos = text.find(sep);
    parts.push_back(text.substr(0, pos));
    if (pos == std::string_view::npos) break;
    text.remove_prefix(pos + 1);
  }
  return parts;
}

std::size_t grid_index(const std::vector<Index>& grid, Index k) {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] == k) return i;
  }
  throw InvalidArgument("bandwidth " + std::to_string(k) + " not in grid");
}

std::size_t argmin_first(const std::vector<double>& values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] < values[best]) best = i;
  }
  return best;
}

MeanSd mean_sd(const std::vector<double>& v) {
  MeanSd out;
  if (v.empty()) return out;
  double sum = 0.0;
  for (double x : v) sum += x;
  out.mean = sum / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - out.mean) * (x - out.mean);
    out.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return out;
}

}  // namespace

std::string format_k_grid(const std::vector<Index>& grid) {
  if (grid.empty()) return "auto";
  bool contiguous = grid.size() > 1;
  for (std::size_t i = 1; i < grid.size() && contiguous; ++i) contiguous = grid[i] == grid[i - 1] + 1;
  if (contiguous) return std::to_string(grid.front()) + ".." + std::to_string(grid.back());
  std::string out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(grid[i]);
  }
  return out;
}

std::vector<Index> parse_k_grid(std::string_view text) {
  if (text == "auto") return {};
  std::vector<Index> grid;
  const auto dots = text.find("..");
  if (dots != std::string_view::npos) {
    const auto lo = parse_number<Index>(text.substr(0, dots), "grid bound");
    const auto hi = parse_number<Index>(text.substr(dots + 2), "grid bound");
    if (lo < 0 || hi < lo) throw ParseError("invalid grid range '" + std::string(text) + "'");
    for (Index k = lo; k <= hi; ++k) grid.push_back(k);
    return grid;
  }
  for (auto part : split(text, ',')) grid.push_back(parse_number<Index>(part, "grid value"));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < 0 || (i && grid[i] <= grid[i - 1])) {
      throw ParseError("grid must be nonnegative and strictly ascending: '" + std::string(text) + "'");
    }
  }
  return grid;
}

void ExperimentSpec::validate() const {
  model.validate();
  if (n < 1 || p < 1 || reps < 1 || splits < 1 || n1 < 0) {
    throw InvalidArgument("experiment sizes must be positive");
  }
  if (n < 4) throw InsufficientData("experiment needs n >= 4");
}

ExperimentSpec ExperimentSpec::resolved() const {
  validate();
  ExperimentSpec out = *this;
  if (out.n1 == 0) out.n1 = default_n1(n);
  if (out.k_grid.empty()) out.k_grid = default_k_grid(kind, out.n1, p);
  return out;
}

std::string to_string(const ExperimentSpec& spec) {
  std::ostringstream out;
  out << "model=" << to_string(spec.model) << ";n=" << spec.n << ";p=" << spec.p << ";reps=" << spec.reps
      << ";splits=" << spec.splits << ";n1=" << (spec.n1 == 0 ? std::string("auto") : std::to_string(spec.n1))
      << ";k=" << format_k_grid(spec.k_grid) << ";kind=" << to_string(spec.kind)
      << ";norm=" << to_string(spec.norm) << ";seed=" << spec.seed;
  return out.str();
}

ExperimentSpec parse_experiment_spec(std::string_view text) {
  ExperimentSpec spec;
  bool have_model = false;
  for (auto field : split(text, ';')) {
    if (field.empty()) continue;
    const auto eq = field.find('=');
    if (eq == std::string_view::npos) throw ParseError("spec field without '=': '" + std::string(field) + "'");
    const auto key = field.substr(0, eq);
    const auto value = field.substr(eq + 1);
    if (key == "model") {
      spec.model = parse_model(value);
      have_model = true;
    } else if (key == "n") {
      spec.n = parse_number<Index>(value, "n");
    } else if (key == "p") {
      spec.p = parse_number<Index>(value, "p");
    } else if (key == "reps") {
      spec.reps = parse_number<Index>(value, "reps");
    } else if (key == "splits") {
      spec.splits = parse_number<Index>(value, "splits");
    } else if (key == "n1") {
      spec.n1 = value == "auto" ? 0 : parse_number<Index>(value, "n1");
    } else if (key == "k") {
      spec.k_grid = parse_k_grid(value);
    } else if (key == "kind") {
      spec.kind = parse_estimator_kind(value);
    } else if (key == "norm") {
      spec.norm = parse_norm(value);
    } else if (key == "seed") {
      spec.seed = parse_number<std::uint64_t>(value, "seed");
    } else {
      throw ParseError("unknown spec field '" + std::string(key) + "'");
    }
  }
  if (!have_model) throw ParseError("spec has no model field");
  return spec;
}

ReportAggregates summarize(const std::vector<ReplicationRecord>& records) {
  std::vector<double> k1, kh, diff, lk, l0, l1, ls;
  for (const auto& r : records) {
    k1.push_back(static_cast<double>(r.k1));
    kh.push_back(static_cast<double>(r.k_hat));
    diff.push_back(static_cast<double>(r.k1 - r.k_hat));
    lk.push_back(r.loss_khat);
    l0.push_back(r.loss_k0);
    l1.push_back(r.loss_k1);
    ls.push_back(r.loss_sample);
  }
  return {mean_sd(k1), mean_sd(kh), mean_sd(diff), mean_sd(lk), mean_sd(l0), mean_sd(l1), mean_sd(ls)};
}

ExperimentReport run_simulation_experiment(const ExperimentSpec& input) {
  const ExperimentSpec spec = input.resolved();
  const SymmetricMatrix truth = build_covariance(spec.model, spec.p);
  const MatrixXd lower = cholesky_factor(truth);
  const auto reps = static_cast<std::size_t>(spec.reps);

  std::vector<std::vector<double>> loss_curves(reps);
  std::vector<RiskCurve> risk_curves(reps);
  std::vector<Index> k_hats(reps);
  std::vector<double> sample_losses(reps);

  parallel_for(reps, [&](std::size_t r) {
    const std::uint64_t data_seed = derive_seed(spec.seed, r);
    const DataMatrix x = sample_gaussian_with_factor(lower, spec.n, data_seed);
    const SymmetricMatrix s = sample_covariance(x);
    loss_curves[r] = loss_curve(s, spec.n, truth, spec.k_grid, spec.kind, Norm::OneOne);
    sample_losses[r] = one_one_norm(s - truth);

    RiskOptions options;
    options.k_grid = spec.k_grid;
    options.kind = spec.kind;
    options.splits = spec.splits;
    options.n1 = spec.n1;
    options.norm = spec.norm;
    options.seed = derive_seed(data_seed, 1);
    auto selection = select_k(estimate_risk(x, options));
    k_hats[r] = selection.k_hat;
    risk_curves[r] = std::move(selection.curve);
  });

  ExperimentReport report;
  report.spec = spec;
  report.k_grid = spec.k_grid;
  report.true_risk.assign(spec.k_grid.size(), 0.0);
  for (const auto& c : loss_curves) {
    for (std::size_t i = 0; i < c.size(); ++i) report.true_risk[i] += c[i];
  }
  for (double& v : report.true_risk) v /= static_cast<double>(reps);
  const std::size_t k0_idx = argmin_first(report.true_risk);
  report.k0 = spec.k_grid[k0_idx];
  report.first_estimated_risk = risk_curves.front();

  for (std::size_t r = 0; r < reps; ++r) {
    const auto& c = loss_curves[r];
    const std::size_t k1_idx = argmin_first(c);
    ReplicationRecord rec;
    rec.rep = static_cast<Index>(r);
    rec.k_hat = k_hats[r];
    rec.k1 = spec.k_grid[k1_idx];
    rec.loss_khat = c[grid_index(spec.k_grid, k_hats[r])];
    rec.loss_k0 = c[k0_idx];
    rec.loss_k1 = c[k1_idx];
    rec.loss_sample = sample_losses[r];
    report.records.push_back(rec);
  }
  report.aggregates = summarize(report.records);
  check_report(report);
  return report;
}

void check_report(const ExperimentReport& report) {
  if (!(summarize(report.records) == report.aggregates)) {
    throw Error("experiment report aggregates do not match its records");
  }
  for (const auto& r : report.records) {
    if (r.loss_k1 > r.loss_k0 || r.loss_k1 > r.loss_khat) {
      throw Error("experiment report: k1 loss exceeds another oracle loss in replication " +
                  std::to_string(r.rep));
    }
  }
}

void write_records_csv(std::ostream& out, const ExperimentReport& report) {
  out << "# spec: " << to_string(report.spec) << '\n';
  out << "# k0=" << report.k0 << '\n';
  out << "# k0 is the argmin of the mean loss over the replications below, not an independent Monte Carlo run\n";
  out << "rep,k_hat,k1,loss_khat,loss_k0,loss_k1,loss_sample\n";
  for (const auto& r : report.records) {
    out << r.rep << ',' << r.k_hat << ',' << r.k1 << ',' << format_double(r.loss_khat) << ','
        << format_double(r.loss_k0) << ',' << format_double(r.loss_k1) << ','
        << format_double(r.loss_sample) << '\n';
  }
}

void write_summary_csv(std::ostream& out, const ExperimentReport& report) {
  check_report(report);
  const auto& a = report.aggregates;
  out << "stat,k0,k1,k_hat,k1_minus_khat,loss_khat,loss_k0,loss_k1,loss_sample\n";
  auto row = [&](const char* name, auto pick) {
    out << name << ',' << report.k0 << ',' << format_double(pick(a.k1)) << ',' << format_double(pick(a.k_hat))
        << ',' << format_double(pick(a.k1_minus_khat)) << ',' << format_double(pick(a.loss_khat)) << ','
        << format_double(pick(a.loss_k0)) << ',' << format_double(pick(a.loss_k1)) << ','
        << format_double(pick(a.loss_sample)) << '\n';
  };
  row("mean", [](const MeanSd& m) { return m.mean; });
  row("sd", [](const MeanSd& m) { return m.sd; });
}

ParsedRecords parse_records_csv(std::istream& in) {
  ParsedRecords parsed;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::string_view view(line);
    if (view.front() == '#') {
      if (view.rfind("# spec: ", 0) == 0) parsed.spec = std::string(view.substr(8));
      if (view.rfind("# k0=", 0) == 0) parsed.k0 = parse_number<Index>(view.substr(5), "k0");
      continue;
    }
    if (!header_seen) {
      if (view != "rep,k_hat,k1,loss_khat,loss_k0,loss_k1,loss_sample") {
        throw ParseError("unexpected records header '" + line + "'");
      }
      header_seen = true;
      continue;
    }
    const auto f = split(view, ',');
    if (f.size() != 7) throw ParseError("records row with " + std::to_string(f.size()) + " fields");
    ReplicationRecord r;
    r.rep = parse_number<Index>(f[0], "rep");
    r.k_hat = parse_number<Index>(f[1], "k_hat");
    r.k1 = parse_number<Index>(f[2], "k1");
    r.loss_khat = parse_number<double>(f[3], "loss");
    r.loss_k0 = parse_number<double>(f[4], "loss");
    r.loss_k1 = parse_number<double>(f[5], "loss");
    r.loss_sample = parse_number<double>(f[6], "loss");
    parsed.records.push_back(r);
  }
  if (!header_seen) throw ParseError("records file has no header");
  return parsed;
}

void write_curve_csv(std::ostream& out, const std::vector<Index>& grid, const std::vector<double>& values) {
  out << "k,risk\n";
  for (std::size_t i = 0; i < grid.size(); ++i) out << grid[i] << ',' << format_double(values[i]) << '\n';
}

ForecastEstimator parse_forecast_estimator(std::string_view text) {
  if (text == "sample") return ForecastEstimator::Sample;
  if (text == "banded") return ForecastEstimator::Banded;
  if (text == "tapered") return ForecastEstimator::Tapered;
  if (text == "cholesky") return ForecastEstimator::Cholesky;
  throw ParseError("unknown estimator '" + std::string(text) + "'");
}

std::string to_string(ForecastEstimator e) {
  switch (e) {
    case ForecastEstimator::Sample:
      return "sample";
    case ForecastEstimator::Banded:
      return "banded";
    case ForecastEstimator::Tapered:
      return "tapered";
    case ForecastEstimator::Cholesky:
      return "cholesky";
  }
  return {};
}

SymmetricMatrix fit_forecast_covariance(const DataMatrix& train, const ForecastOptions& options, Index k) {
  switch (options.estimator) {
    case ForecastEstimator::Sample:
      return sample_covariance(train);
    case ForecastEstimator::Banded:
      return banded_covariance(train, k);
    case ForecastEstimator::Tapered:
      return tapered_covariance(train, options.taper);
    case ForecastEstimator::Cholesky:
      return factors_to_covariance(fit_banded_cholesky(train, k));
  }
  return {};
}

ForecastReport run_forecast_experiment(const DataMatrix& data, const ForecastOptions& options) {
  const Index n = data.rows();
  const Index p = data.cols();
  if (options.n_train < 2 || options.n_train >= n) {
    throw InvalidArgument("n_train must lie in [2, n - 1] (n = " + std::to_string(n) + ")");
  }
  if (options.split < 1 || options.split >= p) {
    throw InvalidArgument("split must lie in [1, p - 1] (p = " + std::to_string(p) + ")");
  }
  const DataMatrix train = data.topRows(options.n_train);
  const DataMatrix test = data.bottomRows(n - options.n_train);
  const VectorXd mu = train.colwise().mean().transpose();

  ForecastReport report;
  report.estimator = options.estimator;
  report.split = options.split;
  report.n_train = options.n_train;
  report.n_test = test.rows();

  const bool banded_kind =
      options.estimator == ForecastEstimator::Banded || options.estimator == ForecastEstimator::Cholesky;
  if (banded_kind) {
    if (options.k) {
      report.k = *options.k;
    } else {
      RiskOptions risk;
      risk.kind = options.estimator == ForecastEstimator::Banded ? EstimatorKind::Banded : EstimatorKind::Cholesky;
      risk.splits = options.splits;
      risk.n1 = options.n1;
      risk.norm = options.norm;
      risk.seed = options.seed;
      report.selection = select_k(estimate_risk(train, risk));
      report.k = report.selection->k_hat;
    }
  }

  const MatrixXd first = test.leftCols(options.split);
  const MatrixXd second = test.rightCols(p - options.split);

  const SymmetricMatrix sigma = fit_forecast_covariance(train, options, report.k);
  const SecondHalfPredictor predictor(partition_moments(mu, sigma, options.split));
  report.errors = forecast_error(predictor.predict_rows(first), second);

  const SecondHalfPredictor baseline(partition_moments(mu, sample_covariance(train), options.split));
  report.baseline_errors = forecast_error(baseline.predict_rows(first), second);
  return report;
}

ForecastReport run_forecast_experiment(const std::string& counts_path, const ForecastOptions& options,
                                       CountTransform transform) {
  return run_forecast_experiment(ingest_counts(counts_path, transform), options);
}

}  // namespace bandcov
