#include "lor/cli/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "lor/error.hpp"

namespace lor::cli {

std::optional<std::string> CsvTable::meta_value(const std::string& key) const {
  for (const auto& [k, v] : meta) {
    if (k == key) return v;
  }
  return std::nullopt;
}

void CsvTable::set_meta(const std::string& key, const std::string& value) {
  for (auto& [k, v] : meta) {
    if (k == key) {
      v = value;
      return;
    }
  }
  meta.emplace_back(key, value);
}

std::ptrdiff_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<std::ptrdiff_t>(i);
  }
  return -1;
}

namespace {

double parse_number(const std::string& s) {
  if (s == "inf") return HUGE_VAL;
  if (s == "-inf") return -HUGE_VAL;
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || s.empty()) {
    throw Error(ErrorKind::MalformedCsv, "not a number: '" + s + "'");
  }
  return v;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

bool needs_quotes(const std::string& s) {
  return s.find_first_of(",\"\r\n") != std::string::npos;
}

}  // namespace

double CsvTable::number(std::size_t row, std::size_t col) const {
  if (row >= rows.size() || col >= rows[row].size()) {
    throw Error(ErrorKind::MalformedCsv, "cell out of range");
  }
  return parse_number(rows[row][col]);
}

double CsvTable::number(std::size_t row, const std::string& name) const {
  const auto c = column(name);
  if (c < 0) throw Error(ErrorKind::MalformedCsv, "missing column '" + name + "'");
  return number(row, static_cast<std::size_t>(c));
}

std::vector<double> CsvTable::numbers(const std::string& name) const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) out.push_back(number(r, name));
  return out;
}

CsvTable read_csv(std::istream& in, bool has_header) {
  CsvTable t;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false, field_quoted = false, at_line_start = true;
  std::size_t line = 1;

  auto finish_record = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_quoted = false;
    if (record.size() == 1 && record[0].empty()) {
      record.clear();
      return;  // blank line
    }
    if (has_header && t.header.empty()) {
      t.header = std::move(record);
    } else {
      const std::size_t want = !t.header.empty() ? t.header.size()
                               : t.rows.empty()  ? record.size()
                                                 : t.rows.front().size();
      if (record.size() != want) {
        throw Error(ErrorKind::MalformedCsv, "line " + std::to_string(line) + ": expected " +
                                                 std::to_string(want) + " fields, got " +
                                                 std::to_string(record.size()));
      }
      t.rows.push_back(std::move(record));
    }
    record.clear();
  };

  for (int ci = in.get(); ci != std::char_traits<char>::eof(); ci = in.get()) {
    const char c = static_cast<char>(ci);
    if (at_line_start && !in_quotes && c == '#') {
      std::string comment;
      std::getline(in, comment);
      ++line;
      comment = trim(comment);
      const auto eq = comment.find('=');
      if (eq != std::string::npos) {
        t.meta.emplace_back(trim(comment.substr(0, eq)), trim(comment.substr(eq + 1)));
      }
      continue;
    }
    at_line_start = false;
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          field.push_back('"');
          in.get();
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty() || field_quoted) {
          throw Error(ErrorKind::MalformedCsv,
                      "line " + std::to_string(line) + ": stray quote inside field");
        }
        in_quotes = field_quoted = true;
        break;
      case ',':
        record.push_back(std::move(field));
        field.clear();
        field_quoted = false;
        break;
      case '\r': break;
      case '\n':
        finish_record();
        ++line;
        at_line_start = true;
        break;
      default:
        if (field_quoted) {
          throw Error(ErrorKind::MalformedCsv,
                      "line " + std::to_string(line) + ": text after closing quote");
        }
        field.push_back(c);
    }
  }
  if (in_quotes) throw Error(ErrorKind::MalformedCsv, "unterminated quoted field");
  if (!field.empty() || field_quoted || !record.empty()) finish_record();
  return t;
}

CsvTable read_csv_file(const std::filesystem::path& path, bool has_header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return read_csv(in, has_header);
}

std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

void write_csv(std::ostream& out, const CsvTable& table) {
  for (const auto& [k, v] : table.meta) out << "# " << k << '=' << v << '\n';
  auto write_record = [&](const std::vector<std::string>& rec) {
    for (std::size_t i = 0; i < rec.size(); ++i) {
      if (i > 0) out << ',';
      if (needs_quotes(rec[i])) {
        out << '"';
        for (char c : rec[i]) {
          if (c == '"') out << '"';
          out << c;
        }
        out << '"';
      } else {
        out << rec[i];
      }
    }
    out << '\n';
  };
  if (!table.header.empty()) write_record(table.header);
  for (const auto& r : table.rows) write_record(r);
}

void write_csv_file(const std::filesystem::path& path, const CsvTable& table) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  write_csv(out, table);
}

}  // namespace lor::cli
