#include "bandcov/simgen.hpp"

#include <charconv>
#include <cmath>

#include "bandcov/csv.hpp"
#include "bandcov/errors.hpp"
#include "bandcov/matcore.hpp"
#include "bandcov/random.hpp"

namespace bandcov {

CovarianceModel CovarianceModel::ma1(double rho) {
  CovarianceModel m{ModelKind::MA1, rho};
  m.validate();
  return m;
}

CovarianceModel CovarianceModel::ar1(double rho) {
  CovarianceModel m{ModelKind::AR1, rho};
  m.validate();
  return m;
}

CovarianceModel CovarianceModel::fgn(double hurst) {
  CovarianceModel m{ModelKind::FGN, hurst};
  m.validate();
  return m;
}

void CovarianceModel::validate() const {
  switch (kind) {
    case ModelKind::MA1:
    case ModelKind::AR1:
      if (!(std::abs(parameter) < 1.0)) {
        throw InvalidArgument("model parameter rho must satisfy |rho| < 1, got " +
                              format_double(parameter));
      }
      return;
    case ModelKind::FGN:
      if (!(parameter >= 0.5 && parameter <= 1.0)) {
        throw InvalidArgument("Hurst parameter must lie in [0.5, 1], got " + format_double(parameter));
      }
      return;
  }
}

double CovarianceModel::lag(Index d) const {
  if (d < 0) d = -d;
  switch (kind) {
    case ModelKind::MA1:
      return d == 0 ? 1.0 : (d == 1 ? parameter : 0.0);
    case ModelKind::AR1:
      return std::pow(parameter, static_cast<double>(d));
    case ModelKind::FGN: {
      const double two_h = 2.0 * parameter;
      const double x = static_cast<double>(d);
      return 0.5 * (std::pow(x + 1.0, two_h) - 2.0 * std::pow(x, two_h) +
                    std::pow(std::abs(x - 1.0), two_h));
    }
  }
  return 0.0;
}

CovarianceModel parse_model(std::string_view text) {
  const auto colon = text.find(':');
  const auto eq = text.find('=');
  if (colon == std::string_view::npos || eq == std::string_view::npos || eq < colon) {
    throw ParseError("model must look like 'ar1:rho=0.5' or 'fgn:H=0.7', got '" + std::string(text) + "'");
  }
  const auto kind = text.substr(0, colon);
  const auto key = text.substr(colon + 1, eq - colon - 1);
  const auto value = text.substr(eq + 1);
  double x = 0.0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), x);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ParseError("invalid model parameter in '" + std::string(text) + "'");
  }
  if (kind == "ma1" && key == "rho") return CovarianceModel::ma1(x);
  if (kind == "ar1" && key == "rho") return CovarianceModel::ar1(x);
  if (kind == "fgn" && key == "H") return CovarianceModel::fgn(x);
  throw ParseError("unknown model '" + std::string(text) + "'");
}

std::string to_string(const CovarianceModel& model) {
  switch (model.kind) {
    case ModelKind::MA1:
      return "ma1:rho=" + format_double(model.parameter);
    case ModelKind::AR1:
      return "ar1:rho=" + format_double(model.parameter);
    case ModelKind::FGN:
      return "fgn:H=" + format_double(model.parameter);
  }
  return {};
}

SymmetricMatrix build_covariance(const CovarianceModel& model, Index p) {
  model.validate();
  if (p < 1) throw InvalidArgument("build_covariance: dimension must be positive");
  VectorXd lags(p);
  for (Index d = 0; d < p; ++d) lags(d) = model.lag(d);
  SymmetricMatrix sigma(p, p);
  for (Index j = 0; j < p; ++j) {
    for (Index i = 0; i < p; ++i) sigma(i, j) = lags(std::abs(i - j));
  }
  return sigma;
}

DataMatrix sample_gaussian_with_factor(const MatrixXd& lower, Index n, std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("sample_gaussian: n must be positive");
  const Index p = lower.rows();
  Rng rng(seed);
  MatrixXd z(n, p);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) z(i, j) = rng.normal();
  }
  return z * lower.triangularView<Eigen::Lower>().transpose();
}

DataMatrix sample_gaussian(const SymmetricMatrix& sigma, Index n, std::uint64_t seed) {
  return sample_gaussian_with_factor(cholesky_factor(sigma), n, seed);
}

}  // namespace bandcov
