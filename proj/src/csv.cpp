#include "rinfo/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "rinfo/error.hpp"

namespace rinfo::csv {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return HUGE_VAL;
  if (s == "-inf") return -HUGE_VAL;
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ParseError("not a number: '" + std::string(s) + "'");
  return v;
}

long long parse_int(std::string_view s) {
  long long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ParseError("not an integer: '" + std::string(s) + "'");
  return v;
}

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      return out;
    }
    out.emplace_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::size_t Table::column(std::string_view name) const {
  for (std::size_t k = 0; k < header.size(); ++k)
    if (header[k] == name) return k;
  throw ParseError("missing column '" + std::string(name) + "'");
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

Table read_table(const std::filesystem::path& path, bool has_header) {
  Table t;
  const auto lines = read_lines(path);
  std::size_t k = 0;
  if (has_header) {
    if (lines.empty()) throw ParseError(path.string() + ": missing header");
    t.header = split(lines[0]);
    k = 1;
  }
  for (; k < lines.size(); ++k) {
    if (lines[k].empty()) continue;
    t.rows.push_back(split(lines[k]));
    if (has_header && t.rows.back().size() != t.header.size())
      throw ParseError(path.string() + ": row " + std::to_string(k) + " has " +
                       std::to_string(t.rows.back().size()) + " cells, expected " +
                       std::to_string(t.header.size()));
  }
  return t;
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

Appender::Appender(const std::filesystem::path& path, std::string_view header) : path_(path) {
  const bool fresh = !std::filesystem::exists(path_) || std::filesystem::file_size(path_) == 0;
  out_.open(path_, std::ios::binary | std::ios::app);
  if (!out_) throw IoError("cannot append to " + path_.string());
  if (fresh) out_ << header << '\n';
}

void Appender::row(const std::vector<std::string>& cells) {
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (k) out_ << ',';
    out_ << cells[k];
  }
  out_ << '\n';
  if (!out_) throw IoError("write failed for " + path_.string());
}

void Appender::flush() {
  out_.flush();
  if (!out_) throw IoError("write failed for " + path_.string());
}

void truncate_rows(const std::filesystem::path& path, std::string_view column, long long limit) {
  if (!std::filesystem::exists(path)) return;
  const auto lines = read_lines(path);
  if (lines.empty()) return;
  const auto header = split(lines[0]);
  std::size_t col = header.size();
  for (std::size_t k = 0; k < header.size(); ++k)
    if (header[k] == column) col = k;
  if (col == header.size()) throw ParseError(path.string() + ": missing column '" + std::string(column) + "'");
  std::ostringstream kept;
  kept << lines[0] << '\n';
  for (std::size_t k = 1; k < lines.size(); ++k) {
    if (lines[k].empty()) continue;
    if (parse_int(split(lines[k])[col]) < limit) kept << lines[k] << '\n';
  }
  write_text(path, kept.str());
}

}  // namespace rinfo::csv
