#pragma once

#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace esqpt {

inline constexpr const char* kVersion = "0.1.0";

using Cell = std::variant<double, long long, std::string>;

/// Column-oriented result table written as CSV or JSON.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row);
};

/// Shortest round-trip decimal form, independent of the locale.
std::string format_number(double v);

/// One header row, '.' decimals, '\n' line endings.
std::string to_csv(const Table& t);
/// {"columns": [...], "rows": [[...], ...]}
nlohmann::json to_json(const Table& t);

/// Writes the whole file or throws IoError.
void write_file(const std::string& path, const std::string& content);
void write_table(const std::string& path, const Table& t, const std::string& format);

/// path with its extension replaced by suffix, e.g. out.csv -> out_features.csv.
std::string sibling_path(const std::string& path, const std::string& suffix);
std::string manifest_path(const std::string& data_path);

}  // namespace esqpt
