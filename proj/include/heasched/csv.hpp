#pragma once

#include <string>
#include <vector>

namespace heasched::csv {

// Minimal strict CSV support: comma separator, no quoting, no embedded
// separators in fields. All files this project reads and writes stay within
// that subset.

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;  // each row has header.size() cells
  // 1-based input line number per row (header is line 1).
  std::vector<long> line_numbers;

  int column(const std::string& name) const;  // -1 when absent
  int require_column(const std::string& name) const;  // throws ParseError
};

Table read_file(const std::string& path);
Table read_string(const std::string& text);

std::string to_string(const Table& table);
void write_file(const std::string& path, const Table& table);

}  // namespace heasched::csv
