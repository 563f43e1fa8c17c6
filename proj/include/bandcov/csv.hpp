#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "bandcov/types.hpp"

namespace bandcov {

// Parsed rows of a headerless comma-separated numeric file. Rows must all
// have the same number of fields.
std::vector<std::vector<double>> parse_csv_rows(std::istream& in, bool skip_non_numeric_header);

MatrixXd read_matrix_csv(const std::string& path);

// Matrix CSV with a symmetry check (absolute tolerance 1e-9) followed by
// symmetrization by averaging.
SymmetricMatrix read_symmetric_csv(const std::string& path);

DataMatrix read_data_csv(const std::string& path);

// Shortest decimal representation that round-trips exactly.
std::string format_double(double value);

void write_matrix_csv(std::ostream& out, const MatrixXd& m);
void write_matrix_csv(const std::string& path, const MatrixXd& m);

}  // namespace bandcov
