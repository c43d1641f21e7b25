#include "popcast/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>

#include "popcast/error.hpp"

namespace popcast::csv {

std::string format(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

std::string format(std::optional<double> v) { return v ? format(*v) : std::string("NA"); }

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      fields.emplace_back(line.substr(start));
      break;
    }
    fields.emplace_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double to_double(std::string_view field, const std::string& source, std::size_t line) {
  field = trim(field);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    throw ParseError(source, line, "expected a number, got '" + std::string(field) + "'");
  }
  return v;
}

std::optional<double> to_optional_double(std::string_view field, const std::string& source,
                                         std::size_t line) {
  if (trim(field) == "NA") return std::nullopt;
  return to_double(field, source, line);
}

std::uint64_t to_uint(std::string_view field, const std::string& source, std::size_t line) {
  field = trim(field);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    throw ParseError(source, line, "expected a non-negative integer, got '" + std::string(field) + "'");
  }
  return v;
}

std::int64_t to_int(std::string_view field, const std::string& source, std::size_t line) {
  field = trim(field);
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    throw ParseError(source, line, "expected an integer, got '" + std::string(field) + "'");
  }
  return v;
}

bool Reader::next(std::string& line) {
  if (!std::getline(in_, line)) return false;
  ++line_;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

void Reader::expect_header(std::string_view header) {
  std::string line;
  if (!next(line)) throw ParseError(source_, 1, "missing header");
  if (line != header) {
    throw ParseError(source_, line_, "unexpected header '" + line + "', expected '" + std::string(header) + "'");
  }
}

}  // namespace popcast::csv
