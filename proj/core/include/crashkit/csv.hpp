#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace crashkit::csv {

/// One data row plus the 1-based line number it came from.
struct Row {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

/// Comma-separated table with a header row. Double-quoted fields may contain
/// commas and doubled quotes; surrounding whitespace is trimmed from
/// unquoted fields. Blank lines are skipped.
class Table {
 public:
  static Table read_file(const std::string& path);
  static Table parse(std::istream& in, std::string source_name);

  const std::string& source() const noexcept { return source_; }
  const std::vector<std::string>& header() const noexcept { return header_; }
  const std::vector<Row>& rows() const noexcept { return rows_; }

  std::optional<std::size_t> find_column(std::string_view name) const;
  /// Column index or ValidationError naming the file and missing column.
  std::size_t require_column(std::string_view name) const;

 private:
  std::string source_;
  std::vector<std::string> header_;
  std::vector<Row> rows_;
};

std::vector<std::string> split_line(std::string_view line);

/// Quotes a field if it contains a comma, quote or newline.
std::string escape(std::string_view field);

/// `%.12g` in the C locale: '.' decimal, no grouping.
std::string format_real(double value);

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

}  // namespace crashkit::csv
