#include "mddest/csv.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace mddest {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

std::string trimmed(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

CsvTable parse_csv(const std::string& text, const std::string& where) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) {
    throw CsvError(where + ": empty file");
  }
  CsvTable table;
  for (const auto& name : split_line(line)) table.header.push_back(trimmed(name));
  const std::size_t cols = table.header.size();
  if (cols == 0) {
    throw CsvError(where + ": empty header row");
  }

  std::vector<double> data;
  std::size_t rows = 0;
  std::size_t file_row = 1;  // header is row 1
  while (std::getline(is, line)) {
    ++file_row;
    if (trimmed(line).empty()) continue;
    std::vector<std::string> cells = split_line(line);
    if (cells.size() != cols) {
      throw CsvError(where + ": row " + std::to_string(file_row) + " has " +
                     std::to_string(cells.size()) + " cells, expected " + std::to_string(cols));
    }
    for (std::size_t c = 0; c < cols; ++c) {
      std::string cell = trimmed(cells[c]);
      errno = 0;
      char* end = nullptr;
      double v = std::strtod(cell.c_str(), &end);
      if (cell.empty() || end != cell.c_str() + cell.size() || errno == ERANGE) {
        throw CsvError(where + ": non-numeric cell at row " + std::to_string(file_row) +
                       ", column " + std::to_string(c + 1) + " ('" + cell + "')");
      }
      data.push_back(v);
    }
    ++rows;
  }

  table.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          data[r * cols + c];
    }
  }
  return table;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw CsvError(path + ": cannot open file");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str(), path);
}

std::string format_csv(const CsvTable& table) {
  std::ostringstream os;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c > 0) os << ',';
    os << table.header[c];
  }
  os << "\n";
  for (Eigen::Index r = 0; r < table.values.rows(); ++r) {
    for (Eigen::Index c = 0; c < table.values.cols(); ++c) {
      if (c > 0) os << ',';
      os << format_double(table.values(r, c));
    }
    os << "\n";
  }
  return os.str();
}

void write_csv(const std::string& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw CsvError(path + ": cannot open file for writing");
  }
  out << format_csv(table);
}

}  // namespace mddest
