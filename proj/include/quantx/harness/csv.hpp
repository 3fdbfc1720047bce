#ifndef QUANTX_HARNESS_CSV_HPP
#define QUANTX_HARNESS_CSV_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "quantx/common.hpp"

namespace quantx {

/// Rows of a numeric CSV file. A single leading header line is tolerated and
/// skipped; every data cell must parse as a number and every row must have
/// the same width. Failures carry the file name and 1-based line number.
std::vector<std::vector<double>> read_numeric_csv(const std::filesystem::path& path);

/// Writes rows with an optional header line; numbers use round-trip precision.
void write_numeric_csv(const std::filesystem::path& path, const std::string& header,
                       const std::vector<std::vector<double>>& rows);

/// Round-trip formatting of one double (shortest form is not required, 17
/// significant digits are).
std::string format_double(double v);

}  // namespace quantx

#endif
