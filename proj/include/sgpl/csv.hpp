#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace sgpl {

// Header-first comma-separated table. Double-quoted fields may contain
// commas and "" escapes; no multi-line fields.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based file line of each row

  // Throws InputError naming the missing column.
  std::size_t column(std::string_view name) const;
  bool has_column(std::string_view name) const;

  // Numeric cell; errors name the file line and column.
  double number(std::size_t row, std::size_t col) const;
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

// %.17g, enough to round-trip a double exactly.
std::string format_double(double v);

}  // namespace sgpl
