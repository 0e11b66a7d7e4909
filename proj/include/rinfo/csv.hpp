#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace rinfo::csv {

/// Shortest decimal that parses back to the same double ("nan", "inf" for
/// non-finite values).
std::string format_double(double v);

double parse_double(std::string_view s);
long long parse_int(std::string_view s);

std::vector<std::string> split(std::string_view line, char sep = ',');

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index by name; throws ParseError when absent.
  std::size_t column(std::string_view name) const;
};

Table read_table(const std::filesystem::path& path, bool has_header = true);

/// Reads the file as lines without their terminators.
std::vector<std::string> read_lines(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, std::string_view text);

/// Appends a row, writing `header` first when the file is new or empty.
class Appender {
 public:
  Appender(const std::filesystem::path& path, std::string_view header);
  void row(const std::vector<std::string>& cells);
  void flush();

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

/// Drops data rows whose integer `column` is >= limit; the header stays.
void truncate_rows(const std::filesystem::path& path, std::string_view column, long long limit);

}  // namespace rinfo::csv
