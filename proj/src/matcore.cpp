#include "bandcov/matcore.hpp"

#include <charconv>
#include <cmath>

#include "bandcov/csv.hpp"

namespace bandcov {

namespace {

// Splits "family:key=value" into its three parts.
bool split_spec(std::string_view text, std::string_view& family, std::string_view& key,
                std::string_view& value) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) return false;
  family = text.substr(0, colon);
  const auto rest = text.substr(colon + 1);
  const auto eq = rest.find('=');
  if (eq == std::string_view::npos) return false;
  key = rest.substr(0, eq);
  value = rest.substr(eq + 1);
  return true;
}

double parse_real(std::string_view v, std::string_view context) {
  double out = 0.0;
  if (v == "inf") return std::numeric_limits<double>::infinity();
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ParseError("invalid number '" + std::string(v) + "' in " + std::string(context));
  }
  return out;
}

}  // namespace

TaperSpec parse_taper(std::string_view text) {
  std::string_view family, key, value;
  if (!split_spec(text, family, key, value)) {
    throw ParseError("taper must look like 'triangular:sigma=3', got '" + std::string(text) + "'");
  }
  const double x = parse_real(value, text);
  if (family == "banding" && key == "k") {
    if (x < 0 || std::floor(x) != x) throw ParseError("banding taper needs an integer k >= 0");
    return TaperSpec::banding(static_cast<Index>(x));
  }
  if (family == "triangular" && key == "sigma") return TaperSpec::triangular(x);
  if (family == "exponential" && key == "sigma") return TaperSpec::exponential(x);
  throw ParseError("unknown taper '" + std::string(text) + "'");
}

std::string to_string(const TaperSpec& t) {
  switch (t.family) {
    case TaperFamily::BandingIndicator:
      return "banding:k=" + std::to_string(static_cast<long long>(t.scale));
    case TaperFamily::Triangular:
      return "triangular:sigma=" + format_double(t.scale);
    case TaperFamily::Exponential:
      return "exponential:sigma=" + format_double(t.scale);
  }
  return {};
}

Norm parse_norm(std::string_view text) {
  if (text == "operator") return Norm::Operator;
  if (text == "one_one") return Norm::OneOne;
  if (text == "max_abs") return Norm::MaxAbs;
  if (text == "frobenius") return Norm::Frobenius;
  throw ParseError("unknown norm '" + std::string(text) + "'");
}

std::string to_string(Norm n) {
  switch (n) {
    case Norm::Operator:
      return "operator";
    case Norm::OneOne:
      return "one_one";
    case Norm::MaxAbs:
      return "max_abs";
    case Norm::Frobenius:
      return "frobenius";
  }
  return {};
}

}  // namespace bandcov
