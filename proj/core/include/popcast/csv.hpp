#pragma once

// Minimal CSV helpers for the flat numeric files this project reads and
// writes. Fields never contain commas or quotes.

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace popcast::csv {

// Shortest decimal form that parses back to the same double.
std::string format(double v);
std::string format(std::optional<double> v);  // "NA" when empty

std::vector<std::string> split(std::string_view line, char sep = ',');
std::string_view trim(std::string_view s);

// Parsers throw ParseError with the given source and line number.
double to_double(std::string_view field, const std::string& source, std::size_t line);
std::optional<double> to_optional_double(std::string_view field, const std::string& source,
                                         std::size_t line);
std::uint64_t to_uint(std::string_view field, const std::string& source, std::size_t line);
std::int64_t to_int(std::string_view field, const std::string& source, std::size_t line);

// Line reader that tracks line numbers and strips trailing '\r'.
class Reader {
 public:
  Reader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  bool next(std::string& line);
  std::size_t line_number() const noexcept { return line_; }
  const std::string& source() const noexcept { return source_; }

  // Reads the header line and checks it matches exactly.
  void expect_header(std::string_view header);

 private:
  std::istream& in_;
  std::string source_;
  std::size_t line_ = 0;
};

}  // namespace popcast::csv
