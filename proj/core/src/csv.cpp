#include "crashkit/csv.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <istream>

#include "crashkit/common.hpp"

namespace crashkit::csv {

std::string trim(std::string_view s) {
  auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return {};
  auto end = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(begin, end - begin + 1));
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
      was_quoted = true;
    } else if (c == ',') {
      fields.push_back(was_quoted ? current : trim(current));
      current.clear();
      was_quoted = false;
    } else {
      current.push_back(c);
    }
  }
  fields.push_back(was_quoted ? current : trim(current));
  return fields;
}

Table Table::read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path + ": cannot open file");
  return parse(in, path);
}

Table Table::parse(std::istream& in, std::string source_name) {
  Table table;
  table.source_ = std::move(source_name);
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    auto fields = split_line(line);
    if (!have_header) {
      for (auto& f : fields) f = to_lower(trim(f));
      table.header_ = std::move(fields);
      have_header = true;
      continue;
    }
    table.rows_.push_back(Row{line_no, std::move(fields)});
  }
  if (!have_header) throw ValidationError(table.source_ + ": missing header row");
  return table;
}

std::optional<std::size_t> Table::find_column(std::string_view name) const {
  auto it = std::find(header_.begin(), header_.end(), name);
  if (it == header_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - header_.begin());
}

std::size_t Table::require_column(std::string_view name) const {
  auto idx = find_column(name);
  if (!idx) {
    throw ValidationError(source_ + ": missing required column '" + std::string(name) + "'");
  }
  return *idx;
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string format_real(double value) {
  if (value == 0.0) return "0";  // folds -0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

}  // namespace crashkit::csv
