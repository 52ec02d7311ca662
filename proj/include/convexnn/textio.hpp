#pragma once

#include <string>
#include <vector>

namespace cvxnn {

/// Doubles are always written with 17 significant digits so repeated runs
/// produce byte-identical files.
std::string format_double(double x);

/// One CSV line from cells; no quoting (cells carry no commas here).
std::string csv_line(const std::vector<std::string>& cells);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace cvxnn
