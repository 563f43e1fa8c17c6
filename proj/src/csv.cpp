#include "bandcov/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "bandcov/errors.hpp"
#include "bandcov/matcore.hpp"

namespace bandcov {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_field(std::string_view field, double& value) {
  field = trim(field);
  if (field.empty()) return false;
  if (field.front() == '+') field.remove_prefix(1);
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  return ec == std::errc() && ptr == end && std::isfinite(value);
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return in;
}

}  // namespace

std::vector<std::vector<double>> parse_csv_rows(std::istream& in, bool skip_non_numeric_header) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<double> row;
    bool numeric = true;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      double v = 0.0;
      if (!parse_field(rest.substr(0, comma), v)) {
        numeric = false;
        break;
      }
      row.push_back(v);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (!numeric) {
      if (skip_non_numeric_header && rows.empty() && line_no == 1) continue;
      throw ParseError("non-numeric field on line " + std::to_string(line_no));
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError("ragged row on line " + std::to_string(line_no) + ": expected " +
                       std::to_string(rows.front().size()) + " fields, found " +
                       std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

MatrixXd to_matrix(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw ParseError("empty matrix file");
  MatrixXd m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return m;
}

}  // namespace

MatrixXd read_matrix_csv(const std::string& path) {
  auto in = open_input(path);
  return to_matrix(parse_csv_rows(in, false));
}

SymmetricMatrix read_symmetric_csv(const std::string& path) {
  MatrixXd m = read_matrix_csv(path);
  if (m.rows() != m.cols()) {
    throw ParseError("'" + path + "' is not square (" + std::to_string(m.rows()) + "x" +
                     std::to_string(m.cols()) + ")");
  }
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
    throw ParseError("'" + path + "' is not symmetric within 1e-9");
  }
  return symmetrize(m);
}

DataMatrix read_data_csv(const std::string& path) { return read_matrix_csv(path); }

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) return std::to_string(value);
  return std::string(buf, ptr);
}

void write_matrix_csv(std::ostream& out, const MatrixXd& m) {
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

void write_matrix_csv(const std::string& path, const MatrixXd& m) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write '" + path + "'");
  write_matrix_csv(out, m);
}

}  // namespace bandcov
