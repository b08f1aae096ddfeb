#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace uncnet::csv {

struct Row {
  std::size_t line = 0;  // 1-based line number in the file
  std::vector<std::string> fields;
};

struct Table {
  std::vector<std::string> header;
  std::vector<Row> rows;

  /// Index of a header column; throws InputError when missing.
  std::size_t column(std::string_view name) const;
};

/// Reads a comma-separated file with a mandatory header row. Plain fields
/// only (no quoting); blank lines are skipped; tolerates trailing '\r'.
Table read_file(const std::filesystem::path& path);

Table parse(std::string_view text);

/// Locale-independent numeric parsing. Throws InputError with the offending
/// text on failure.
double parse_double(std::string_view text);
std::int64_t parse_int(std::string_view text);

/// Formats a double so the exact value survives a write/read round trip.
std::string format_double(double v);

class Writer {
 public:
  explicit Writer(std::vector<std::string> header);
  void add_row(std::vector<std::string> fields);
  std::string str() const;
  std::size_t row_count() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Writes bytes via a temp file in the same directory, then renames into
/// place so partially written files never appear under the final name.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

}  // namespace uncnet::csv
