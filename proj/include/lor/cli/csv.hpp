#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace lor::cli {

/// RFC-4180 table with '#'-prefixed metadata lines ("# key=value") ahead of
/// the data. Tables without a header row (joint histogram dumps) keep
/// `header` empty.
struct CsvTable {
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::string> meta_value(const std::string& key) const;
  void set_meta(const std::string& key, const std::string& value);
  /// Column index, or -1 when absent.
  std::ptrdiff_t column(const std::string& name) const;
  /// Numeric cell; MalformedCsv if the column is missing or the cell is not a number.
  double number(std::size_t row, const std::string& name) const;
  double number(std::size_t row, std::size_t col) const;
  std::vector<double> numbers(const std::string& name) const;
};

/// Parses quoted fields, doubled quotes and embedded newlines. Every record
/// must have the same number of fields. With `has_header` the first record
/// becomes the header.
CsvTable read_csv(std::istream& in, bool has_header = true);
CsvTable read_csv_file(const std::filesystem::path& path, bool has_header = true);

void write_csv(std::ostream& out, const CsvTable& table);
void write_csv_file(const std::filesystem::path& path, const CsvTable& table);

/// Shortest decimal that round-trips the double.
std::string format_number(double v);

}  // namespace lor::cli
