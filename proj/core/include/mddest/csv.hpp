#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace mddest {

/// Numeric CSV payload: comma separated, one header row, decimal point,
/// UTF-8.  Values are written with 17 significant digits so that a write /
/// read cycle reproduces every double bit-exactly.
struct CsvTable {
  std::vector<std::string> header;
  Eigen::MatrixXd values;
};

struct CsvError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Throws CsvError naming the offending cell ("row R, column C", 1-based
/// with the header as row 1) on ragged rows or non-numeric cells.
CsvTable read_csv(const std::string& path);
CsvTable parse_csv(const std::string& text, const std::string& where = "<string>");

std::string format_csv(const CsvTable& table);
void write_csv(const std::string& path, const CsvTable& table);

/// Shortest-exact formatting used across all file outputs.
std::string format_double(double v);

}  // namespace mddest
