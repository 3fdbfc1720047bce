#include "quantx/harness/csv.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>

namespace quantx {

namespace {

bool parse_row(const std::string& line, std::vector<double>& out) {
  out.clear();
  std::size_t start = 0;
  while (start <= line.size()) {
    std::size_t end = line.find(',', start);
    if (end == std::string::npos) end = line.size();
    std::string cell = line.substr(start, end - start);
    // trim spaces and a possible trailing carriage return
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\r' || cell.back() == '\t'))
      cell.pop_back();
    std::size_t lead = 0;
    while (lead < cell.size() && (cell[lead] == ' ' || cell[lead] == '\t')) ++lead;
    cell.erase(0, lead);
    if (cell.empty()) return false;
    errno = 0;
    char* tail = nullptr;
    const double v = std::strtod(cell.c_str(), &tail);
    if (errno != 0 || tail == cell.c_str() || *tail != '\0') return false;
    out.push_back(v);
    start = end + 1;
    if (end == line.size()) break;
  }
  return !out.empty();
}

}  // namespace

std::vector<std::vector<double>> read_numeric_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::missing_file, "cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::vector<double> row;
  std::size_t line_no = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    if (!parse_row(line, row)) {
      if (line_no == 1) continue;  // header line
      fail(Errc::malformed_row,
           path.string() + ":" + std::to_string(line_no) + ": cannot parse row");
    }
    if (width == 0) width = row.size();
    if (row.size() != width)
      fail(Errc::malformed_row, path.string() + ":" + std::to_string(line_no) + ": expected " +
                                    std::to_string(width) + " columns, got " +
                                    std::to_string(row.size()));
    rows.push_back(row);
  }
  return rows;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_numeric_csv(const std::filesystem::path& path, const std::string& header,
                       const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  if (!out) fail(Errc::io_error, "cannot write " + path.string());
  if (!header.empty()) out << header << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << format_double(row[i]);
    }
    out << '\n';
  }
  if (!out) fail(Errc::io_error, "failed while writing " + path.string());
}

}  // namespace quantx
