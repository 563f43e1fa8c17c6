// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "bandcov/estimators.hpp"
#include "bandcov/experiment.hpp"
#include "bandcov/matcore.hpp"
#include "bandcov/random.hpp"
#include "bandcov/selection.hpp"
#include "bandcov/simgen.hpp"
#include "test_util.hpp"

using namespace bandcov;
using bandcov::testing::random_dim;
using bandcov::testing::random_matrix;
using bandcov::testing::random_pd;
using bandcov::testing::random_symmetric;

namespace {

constexpr std::uint64_t kSeed = 20260101;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

bool within_abs(double value, double target, double tol) { return std::abs(value - target) <= tol; }
bool within_rel(double value, double target, double tol) { return std::abs(value - target) <= tol * std::abs(target); }

ExperimentReport bench_cell(const CovarianceModel& model, Index p, std::uint64_t seed) {
  ExperimentSpec spec;
  spec.model = model;
  spec.n = 100;
  spec.p = p;
  spec.reps = 100;
  spec.splits = 50;
  spec.n1 = 33;
  spec.seed = seed;
  return run_simulation_experiment(spec);
}

std::vector<Index> range(Index lo, Index hi) {
  std::vector<Index> g;
  for (Index k = lo; k <= hi; ++k) g.push_back(k);
  return g;
}

void ma1_bench(Outcome& o) {
  const Index ps[] = {10, 100, 200};
  const double loss_khat[] = {0.5, 0.8, 0.9};
  const double loss_sample[] = {1.2, 10.6, 20.6};
  for (int i = 0; i < 3; ++i) {
    const auto r = bench_cell(CovarianceModel::ma1(0.5), ps[i], kSeed + 1);
    const auto ones = std::count_if(r.records.begin(), r.records.end(), [](const auto& x) { return x.k_hat == 1; });
    const auto& g = r.aggregates;
    o.detail << " p=" << ps[i] << ": k_hat=1 in " << ones << "/100, loss(k_hat)=" << g.loss_khat.mean
             << ", loss(sample)=" << g.loss_sample.mean << ';';
    o.require(ones >= 95, "k_hat=1 count at p=" + std::to_string(ps[i]));
    o.require(within_abs(g.loss_khat.mean, loss_khat[i], 0.15), "loss(k_hat) at p=" + std::to_string(ps[i]));
    o.require(within_rel(g.loss_sample.mean, loss_sample[i], 0.10), "loss(sample) at p=" + std::to_string(ps[i]));
  }
}

void ar1_bench(Outcome& o) {
  const auto low = bench_cell(CovarianceModel::ar1(0.1), 100, kSeed + 2).aggregates;
  o.detail << " rho=0.1: mean k_hat=" << low.k_hat.mean << ", loss(sample)=" << low.loss_sample.mean << ';';
  o.require(low.k_hat.mean <= 0.5, "rho=0.1 mean k_hat");
  o.require(within_rel(low.loss_sample.mean, 10.2, 0.10), "rho=0.1 loss(sample)");

  const auto high = bench_cell(CovarianceModel::ar1(0.9), 100, kSeed + 2).aggregates;
  o.detail << " rho=0.9: mean k_hat=" << high.k_hat.mean << ", loss(k_hat)=" << high.loss_khat.mean
           << ", loss(sample)=" << high.loss_sample.mean << ';';
  o.require(high.k_hat.mean >= 13 && high.k_hat.mean <= 19, "rho=0.9 mean k_hat");
  o.require(within_rel(high.loss_khat.mean, 9.2, 0.15), "rho=0.9 loss(k_hat)");
  o.require(within_rel(high.loss_sample.mean, 13.5, 0.10), "rho=0.9 loss(sample)");
}

void fgn_bench(Outcome& o) {
  const auto white = bench_cell(CovarianceModel::fgn(0.5), 100, kSeed + 3).aggregates;
  o.detail << " H=0.5: mean k_hat=" << white.k_hat.mean << ", loss(k_hat)=" << white.loss_khat.mean << ';';
  o.require(white.k_hat.mean <= 0.2, "H=0.5 mean k_hat");
  o.require(within_abs(white.loss_khat.mean, 0.4, 0.15), "H=0.5 loss(k_hat)");

  const auto lrd = bench_cell(CovarianceModel::fgn(0.9), 100, kSeed + 3).aggregates;
  o.detail << " H=0.9: mean k_hat=" << lrd.k_hat.mean << ", loss(k_hat)=" << lrd.loss_khat.mean
           << ", loss(sample)=" << lrd.loss_sample.mean << ';';
  o.require(lrd.k_hat.mean >= 55 && lrd.k_hat.mean <= 115, "H=0.9 mean k_hat");
  o.require(lrd.loss_khat.mean <= 1.15 * lrd.loss_sample.mean, "H=0.9 loss(k_hat) vs loss(sample)");
}

// Minimum at k = 1 and nondecreasing over [1, 30] up to at most two dips of
// at most 2%.
bool risk_shape_ok(const std::vector<Index>& grid, const std::vector<double>& risk, std::string& note) {
  const auto best = std::min_element(risk.begin(), risk.end()) - risk.begin();
  int dips = 0;
  bool small = true;
  for (std::size_t i = 1; i + 1 < risk.size(); ++i) {
    if (risk[i + 1] < risk[i]) {
      ++dips;
      if (risk[i] - risk[i + 1] > 0.02 * risk[i]) small = false;
    }
  }
  note = "argmin=" + std::to_string(grid[static_cast<std::size_t>(best)]) + " dips=" + std::to_string(dips);
  return grid[static_cast<std::size_t>(best)] == 1 && dips <= 2 && small;
}

void risk_curve_shape(Outcome& o) {
  for (Index p : {10, 100, 200}) {
    ExperimentSpec spec;
    spec.model = CovarianceModel::ma1(0.5);
    spec.n = 100;
    spec.p = p;
    spec.reps = 100;
    spec.splits = 50;
    spec.n1 = 33;
    spec.k_grid = range(0, std::min<Index>(30, p - 1));
    spec.seed = kSeed + 4;
    const auto r = run_simulation_experiment(spec);
    std::string true_note, est_note;
    const bool true_ok = risk_shape_ok(r.k_grid, r.true_risk, true_note);
    const bool est_ok = risk_shape_ok(r.first_estimated_risk.k_grid, r.first_estimated_risk.risk, est_note);
    o.detail << " p=" << p << ": true " << true_note << ", estimated " << est_note << ';';
    o.require(true_ok, "true risk shape at p=" + std::to_string(p));
    o.require(est_ok, "estimated risk shape at p=" + std::to_string(p));
  }
}

void k0_monotonicity(Outcome& o) {
  for (Index p : {10, 100, 200}) {
    std::vector<double> ar, fgn;
    for (double rho : {0.1, 0.5, 0.9}) {
      const auto k0 = oracle_k0(CovarianceModel::ar1(rho), 100, p, {}, 100, EstimatorKind::Banded, Norm::OneOne, kSeed + 5);
      ar.push_back(static_cast<double>(k0.k0) / static_cast<double>(p));
    }
    for (double h : {0.5, 0.7, 0.9}) {
      const auto k0 = oracle_k0(CovarianceModel::fgn(h), 100, p, {}, 100, EstimatorKind::Banded, Norm::OneOne, kSeed + 5);
      fgn.push_back(static_cast<double>(k0.k0) / static_cast<double>(p));
    }
    o.detail << " p=" << p << ": ar1 k0/p=" << ar[0] << ',' << ar[1] << ',' << ar[2] << " fgn k0/p=" << fgn[0] << ','
             << fgn[1] << ',' << fgn[2] << ';';
    o.require(std::is_sorted(ar.begin(), ar.end()), "ar1 monotone at p=" + std::to_string(p));
    o.require(std::is_sorted(fgn.begin(), fgn.end()), "fgn monotone at p=" + std::to_string(p));
  }
}

void rate(Outcome& o) {
  const Index p = 100;
  const MatrixXd truth = build_covariance(CovarianceModel::ar1(0.5), p);
  const MatrixXd lower = cholesky_factor(truth);
  const auto grid = range(0, p - 1);
  std::vector<double> medians;
  for (Index n : {100, 400, 1600}) {
    std::vector<double> best;
    for (std::uint64_t s = 0; s < 20; ++s) {
      const DataMatrix x = sample_gaussian_with_factor(lower, n, derive_seed(kSeed + 6, s));
      const auto curve = loss_curve(sample_covariance(x), n, truth, grid, EstimatorKind::Banded, Norm::OneOne);
      best.push_back(*std::min_element(curve.begin(), curve.end()));
    }
    std::sort(best.begin(), best.end());
    medians.push_back(0.5 * (best[9] + best[10]));
    o.detail << " n=" << n << ": median oracle loss " << medians.back() << ';';
  }
  o.require(medians[0] > medians[1] && medians[1] > medians[2], "strict decrease");
}

void equivalences(Outcome& o) {
  double worst_full = 0, worst_inverse = 0;
  bool taper_exact = true;
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng rng(derive_seed(kSeed + 7, s));
    const MatrixXd x = random_matrix(rng, 50, 5);
    const MatrixXd sample = sample_covariance(x);
    const auto full = factors_to_matrices(fit_banded_cholesky(x, 4));
    worst_full = std::max(worst_full, (full.covariance - sample).norm() / sample.norm());

    const Index p = random_dim(rng, 2, 30);
    const Index n = random_dim(rng, p + 2, 80);
    const MatrixXd y = random_matrix(rng, n, p);
    for (Index k = 0; k < p; ++k) {
      const auto m = factors_to_matrices(fit_banded_cholesky(y, k));
      const MatrixXd eye = MatrixXd::Identity(p, p);
      worst_inverse = std::max(worst_inverse, (m.precision * m.covariance - eye).norm() / eye.norm());
      const MatrixXd s = sample_covariance(y);
      if (schur_product(s, taper_weights(TaperSpec::banding(k), p)) != band(s, k)) taper_exact = false;
    }
  }
  o.detail << " full-band relative error " << worst_full << "; precision*covariance relative error " << worst_inverse
           << "; banding taper exact=" << (taper_exact ? "yes" : "no") << ';';
  o.require(worst_full <= 1e-8, "full band equals sample covariance");
  o.require(worst_inverse <= 1e-8, "precision inverts covariance");
  o.require(taper_exact, "banding taper equals band");
}

void invariants(Outcome& o) {
  constexpr int kTrials = 100;
  Rng rng(kSeed + 8);
  int weyl = 0, schur = 0, norm_ineq = 0, band_alg = 0, determinism = 0, scale = 0;
  for (int t = 0; t < kTrials; ++t) {
    const Index p = random_dim(rng, 1, 30);
    const MatrixXd a = random_symmetric(rng, p);
    const MatrixXd e = 0.1 * random_symmetric(rng, p);
    const double bound = matrix_norm(e, Norm::Operator);
    const VectorXd la = sym_eigenvalues(a), lb = sym_eigenvalues(MatrixXd(a + e));
    if ((la - lb).cwiseAbs().maxCoeff() > bound + 1e-10 * (1.0 + bound)) ++weyl;

    if (!is_positive_definite(schur_product(random_pd(rng, p), random_pd(rng, p)))) ++schur;

    if (matrix_norm(a, Norm::Operator) > matrix_norm(a, Norm::OneOne) * (1.0 + 1e-12)) ++norm_ineq;

    const Index j = random_dim(rng, 0, p), k = random_dim(rng, 0, p);
    if (band(band(a, k), k) != band(a, k) || band(band(a, j), k) != band(a, std::min(j, k))) ++band_alg;

    const Index n = random_dim(rng, 12, 40);
    const MatrixXd x = random_matrix(rng, n, p);
    RiskOptions options;
    options.splits = 5;
    options.seed = rng.next();
    const auto first = estimate_risk(x, options);
    const auto second = estimate_risk(x, options);
    if (first.risk != second.risk) ++determinism;
    const double c = 0.1 + 10.0 * rng.uniform();
    if (select_k(estimate_risk(c * x, options)).k_hat != select_k(first).k_hat) ++scale;
  }
  o.detail << ' ' << kTrials << " instances each; failures: weyl=" << weyl << " schur=" << schur
           << " norm=" << norm_ineq << " band=" << band_alg << " determinism=" << determinism
           << " scale=" << scale << ';';
  o.require(weyl + schur + norm_ineq + band_alg + determinism + scale == 0, "invariant failures");
}

void forecast(Outcome& o) {
  const MatrixXd sigma = build_covariance(CovarianceModel::fgn(0.9), 102);
  const MatrixXd lower = cholesky_factor(sigma);
  int wins = 0;
  for (std::uint64_t m = 1; m <= 10; ++m) {
    const std::uint64_t master = kSeed + 100 + m;
    const DataMatrix data = sample_gaussian_with_factor(lower, 239, derive_seed(master, 0));
    ForecastOptions options;
    options.n_train = 205;
    options.split = 51;
    options.estimator = ForecastEstimator::Cholesky;
    options.seed = derive_seed(master, 1);
    const auto r = run_forecast_experiment(data, options);
    const bool win = r.mean_error() <= r.mean_baseline_error();
    wins += win ? 1 : 0;
    o.detail << " seed " << m << ": k=" << r.k << ' ' << r.mean_error() << " vs " << r.mean_baseline_error() << ';';
  }
  o.detail << " wins " << wins << "/10;";
  o.require(wins >= 8, "cholesky predictor wins");
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<void(Outcome&)> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "MA(1) benchmark table", ma1_bench},
      {2, "AR(1) benchmark spot checks", ar1_bench},
      {3, "FGN benchmark spot checks", fgn_bench},
      {4, "MA(1) risk curve shape", risk_curve_shape},
      {5, "oracle bandwidth monotone in dependence", k0_monotonicity},
      {6, "oracle loss decreases with n", rate},
      {7, "estimator equivalences", equivalences},
      {8, "randomized invariants", invariants},
      {9, "synthetic forecast comparison", forecast},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failures;
    std::printf("%s criterion %d (%s):%s (%.1fs)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.str().c_str(),
                secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
