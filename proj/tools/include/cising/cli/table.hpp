#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace cising::cli {

using Cell = std::variant<double, std::int64_t, std::string>;

struct Table {
  std::string name;  // file stem
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row);
};

/// %.17g-equivalent formatting; nan and +-inf spelled out.
std::string format_double(double x);

/// CSV text: header row, LF line endings, RFC 4180 quoting where needed.
std::string to_csv(const Table& table);

/// Writes to_csv(table) to `path`. Throws IoError.
void write_table(const Table& table, const std::filesystem::path& path);

}  // namespace cising::cli
