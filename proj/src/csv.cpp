#include "heasched/csv.hpp"

#include <fstream>
#include <sstream>

#include "heasched/errors.hpp"

namespace heasched::csv {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  if (cells.empty()) cells.emplace_back();
  return cells;
}

}  // namespace

int Table::column(const std::string& name) const {
  for (size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

int Table::require_column(const std::string& name) const {
  int c = column(name);
  if (c < 0) throw ParseError(1, name, "missing required column");
  return c;
}

Table read_string(const std::string& text) {
  Table table;
  std::stringstream ss(text);
  std::string line;
  long line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_line(line);
    if (table.header.empty()) {
      table.header = std::move(cells);
      continue;
    }
    if (cells.size() != table.header.size())
      throw ParseError(line_no, "",
                       "expected " + std::to_string(table.header.size()) + " cells, got " +
                           std::to_string(cells.size()));
    table.rows.push_back(std::move(cells));
    table.line_numbers.push_back(line_no);
  }
  return table;
}

Table read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, path, "cannot open file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return read_string(buffer.str());
}

std::string to_string(const Table& table) {
  std::string out;
  auto append_row = [&out](const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  append_row(table.header);
  for (const auto& row : table.rows) append_row(row);
  return out;
}

void write_file(const std::string& path, const Table& table) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open for writing: " + path);
  out << to_string(table);
  if (!out) throw Error("write failed: " + path);
}

}  // namespace heasched::csv
