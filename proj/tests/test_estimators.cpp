#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "bandcov/estimators.hpp"
#include "test_util.hpp"

using namespace bandcov;
using bandcov::testing::random_dim;
using bandcov::testing::random_matrix;

namespace {

// Direct double loop over observation pairs, divisor n.
MatrixXd brute_force_covariance(const MatrixXd& x) {
  const Index n = x.rows(), p = x.cols();
  MatrixXd out(p, p);
  for (Index a = 0; a < p; ++a) {
    double ma = 0;
    for (Index i = 0; i < n; ++i) ma += x(i, a);
    ma /= n;
    for (Index b = 0; b < p; ++b) {
      double mb = 0;
      for (Index i = 0; i < n; ++i) mb += x(i, b);
      mb /= n;
      double s = 0;
      for (Index i = 0; i < n; ++i) s += (x(i, a) - ma) * (x(i, b) - mb);
      out(a, b) = s / n;
    }
  }
  return out;
}

// Least squares of column j on its k nearest predecessors via Householder QR
// of the centered design, independent of the normal-equation path.
void qr_regression(const MatrixXd& x, Index j, Index k, VectorXd& coef, double& resid_var) {
  const Index n = x.rows();
  const MatrixXd c = x.rowwise() - x.colwise().mean();
  const Index first = std::max<Index>(0, j - k);
  const Index width = j - first;
  if (width == 0) {
    coef.resize(0);
    resid_var = c.col(j).squaredNorm() / n;
    return;
  }
  const MatrixXd design = c.middleCols(first, width);
  coef = design.householderQr().solve(c.col(j));
  resid_var = (c.col(j) - design * coef).squaredNorm() / n;
}

MatrixXd correlated_data(Rng& rng, Index n, Index p) {
  MatrixXd z = random_matrix(rng, n, p);
  for (Index j = 1; j < p; ++j) z.col(j) += 0.6 * z.col(j - 1);
  return z;
}

}  // namespace

TEST_CASE("sample covariance basic cases") {
  CHECK(sample_covariance(MatrixXd::Constant(1, 4, 3.0)).isZero());
  MatrixXd two(2, 1);
  two << 0, 2;
  CHECK(sample_covariance(two)(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("sample covariance agrees with the brute-force oracle") {
  Rng rng(101);
  const MatrixXd x = random_matrix(rng, 50, 5);
  const MatrixXd s = sample_covariance(x);
  CHECK((s - brute_force_covariance(x)).cwiseAbs().maxCoeff() < 1e-13);
  CHECK(s == s.transpose());
  CHECK(sym_eigenvalues(s).minCoeff() > -1e-12);
}

TEST_CASE("sample covariance permutation invariance and scale equivariance") {
  Rng rng(103);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = random_dim(rng, 2, 40), p = random_dim(rng, 1, 8);
    const MatrixXd x = random_matrix(rng, n, p);
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::reverse(order.begin(), order.end());
    MatrixXd permuted(n, p);
    for (Index i = 0; i < n; ++i) permuted.row(i) = x.row(order[static_cast<std::size_t>(i)]);
    const MatrixXd s = sample_covariance(x);
    CHECK((sample_covariance(permuted) - s).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((sample_covariance(3.0 * x) - 9.0 * s).cwiseAbs().maxCoeff() < 1e-11);
  }
}

TEST_CASE("banded covariance") {
  Rng rng(107);
  const MatrixXd x = random_matrix(rng, 30, 6);
  const MatrixXd s = sample_covariance(x);
  CHECK(banded_covariance(x, 0) == MatrixXd(s.diagonal().asDiagonal()));
  CHECK(banded_covariance(x, 5) == s);
  CHECK(banded_covariance(x, 9) == s);
  for (Index k = 0; k < 6; ++k) {
    CHECK(banded_covariance(x, k) == schur_product(s, taper_weights(TaperSpec::banding(k), 6)));
  }
}

TEST_CASE("tapered covariance") {
  Rng rng(109);
  const MatrixXd x = random_matrix(rng, 40, 7);
  const MatrixXd s = sample_covariance(x);
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(tapered_covariance(x, TaperSpec::triangular(inf)) == s);
  CHECK(tapered_covariance(x, TaperSpec::exponential(inf)) == s);
  for (Index k = 0; k < 7; ++k) CHECK(tapered_covariance(x, TaperSpec::banding(k)) == banded_covariance(x, k));
  REQUIRE(is_positive_definite(s));
  const MatrixXd t = tapered_covariance(x, TaperSpec::triangular(3.0));
  CHECK(is_positive_definite(t));
  CHECK(sym_eigenvalues(t).minCoeff() > 0.0);
}

TEST_CASE("cholesky fit with k = 0 is the diagonal of variances") {
  Rng rng(113);
  const MatrixXd x = random_matrix(rng, 20, 4);
  const auto f = fit_banded_cholesky(x, 0);
  CHECK(f.coefficients.isZero());
  CHECK((f.residual_variances - sample_covariance(x).diagonal()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("cholesky fit p = 2, k = 1 matches simple regression") {
  Rng rng(127);
  const MatrixXd x = correlated_data(rng, 25, 2);
  const MatrixXd s = sample_covariance(x);
  const auto f = fit_banded_cholesky(x, 1);
  CHECK(f.coefficients(1, 0) == doctest::Approx(s(0, 1) / s(0, 0)).epsilon(1e-12));
  CHECK(f.residual_variances(1) == doctest::Approx(s(1, 1) - s(0, 1) * s(0, 1) / s(0, 0)).epsilon(1e-12));
  CHECK(f.residual_variances(0) == doctest::Approx(s(0, 0)).epsilon(1e-12));
}

TEST_CASE("cholesky fit agrees with QR least squares") {
  Rng rng(131);
  for (int trial = 0; trial < 20; ++trial) {
    const Index p = random_dim(rng, 2, 12);
    const Index n = random_dim(rng, p + 3, 60);
    const Index k = random_dim(rng, 0, p - 1);
    const MatrixXd x = correlated_data(rng, n, p);
    const auto f = fit_banded_cholesky(x, k);
    CHECK(f.k == k);
    for (Index j = 0; j < p; ++j) {
      VectorXd coef;
      double resid = 0;
      qr_regression(x, j, k, coef, resid);
      const Index first = std::max<Index>(0, j - k);
      for (Index t = 0; t < p; ++t) {
        const double expected = (t >= first && t < j) ? coef(t - first) : 0.0;
        REQUIRE(std::abs(f.coefficients(j, t) - expected) < 1e-9);
      }
      REQUIRE(std::abs(f.residual_variances(j) - resid) < 1e-10 * std::max(1.0, resid));
    }
  }
}

TEST_CASE("full-band cholesky reproduces the sample covariance") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(1000 + seed);
    const MatrixXd x = correlated_data(rng, 50, 5);
    const MatrixXd s = sample_covariance(x);
    const auto m = factors_to_matrices(fit_banded_cholesky(x, 4));
    REQUIRE((m.covariance - s).norm() <= 1e-8 * s.norm());
  }
}

TEST_CASE("cholesky fit errors") {
  Rng rng(137);
  const MatrixXd x = random_matrix(rng, 6, 8);
  CHECK_THROWS_AS(fit_banded_cholesky(x, 5), BandwidthTooLarge);
  CHECK_NOTHROW(fit_banded_cholesky(x, 4));
  CHECK_THROWS_AS(fit_banded_cholesky(x, -1), InvalidArgument);

  MatrixXd dup = random_matrix(rng, 30, 4);
  dup.col(2) = dup.col(1);
  CHECK_NOTHROW(fit_banded_cholesky(dup, 0));
  CHECK_THROWS_AS(fit_banded_cholesky(dup, 1), SingularDesign);

  MatrixXd constant = random_matrix(rng, 10, 3);
  constant.col(0).setConstant(2.0);
  CHECK_THROWS_AS(fit_banded_cholesky(constant, 0), SingularDesign);
}

TEST_CASE("residual variances are nonincreasing in k") {
  Rng rng(139);
  for (int trial = 0; trial < 10; ++trial) {
    const MatrixXd x = correlated_data(rng, 40, 10);
    const CholeskyRegressionPath path(sample_covariance(x), 9);
    VectorXd prev = path.factors(0).residual_variances;
    for (Index k = 1; k <= 9; ++k) {
      const VectorXd cur = path.factors(k).residual_variances;
      REQUIRE(((cur.array() - prev.array()) <= 1e-12).all());
      prev = cur;
    }
  }
}

TEST_CASE("regression path matches independent fits") {
  Rng rng(149);
  const MatrixXd x = correlated_data(rng, 30, 8);
  const CholeskyRegressionPath path(sample_covariance(x), 6);
  CHECK(path.max_valid_k() == 6);
  for (Index k = 0; k <= 6; ++k) {
    const auto a = path.factors(k);
    const auto b = fit_banded_cholesky(x, k);
    CHECK((a.coefficients - b.coefficients).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("factors to matrices") {
  BandedCholeskyFactors diag;
  diag.k = 0;
  diag.coefficients = MatrixXd::Zero(3, 3);
  diag.residual_variances = Eigen::Vector3d(1.0, 2.0, 4.0);
  const auto m = factors_to_matrices(diag);
  CHECK((m.precision - MatrixXd(Eigen::Vector3d(1.0, 0.5, 0.25).asDiagonal())).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((m.covariance - MatrixXd(diag.residual_variances.asDiagonal())).cwiseAbs().maxCoeff() < 1e-15);

  Rng rng(151);
  BandedCholeskyFactors f;
  f.k = 2;
  f.coefficients = MatrixXd::Zero(6, 6);
  f.residual_variances.resize(6);
  for (Index j = 0; j < 6; ++j) {
    f.residual_variances(j) = 0.5 + rng.uniform();
    for (Index t = std::max<Index>(0, j - 2); t < j; ++t) f.coefficients(j, t) = rng.normal();
  }
  const auto r = factors_to_matrices(f);
  CHECK((r.precision * r.covariance - MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-8);
  for (Index i = 0; i < 6; ++i) {
    for (Index j = 0; j < 6; ++j) {
      if (std::abs(i - j) > 2) CHECK(r.precision(i, j) == 0.0);
    }
  }
  CHECK(is_positive_definite(r.precision));
}

TEST_CASE("fitted precision is banded, positive definite, and inverts the covariance") {
  Rng rng(157);
  for (int trial = 0; trial < 30; ++trial) {
    const Index p = random_dim(rng, 2, 20);
    const Index n = random_dim(rng, 10, 60);
    const Index k = random_dim(rng, 0, std::min(p - 1, n - 2));
    const MatrixXd x = correlated_data(rng, n, p);
    const auto m = factors_to_matrices(fit_banded_cholesky(x, k));
    REQUIRE(is_positive_definite(m.precision));
    for (Index i = 0; i < p; ++i) {
      for (Index j = 0; j < p; ++j) {
        if (std::abs(i - j) > k) REQUIRE(m.precision(i, j) == 0.0);
      }
    }
    const MatrixXd prod = m.precision * m.covariance;
    REQUIRE((prod - MatrixXd::Identity(p, p)).norm() <= 1e-8 * std::sqrt(static_cast<double>(p)));
  }
}
