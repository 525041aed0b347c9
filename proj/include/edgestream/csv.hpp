#pragma once

// Minimal CSV helpers shared by the manifest, trace and metrics formats.
// Fields containing a comma or a double quote are double-quoted with the
// usual doubling convention (the bench config keys are spelled "1,s");
// everything else is emitted verbatim.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace edgestream {

struct ParseError : std::runtime_error {
  ParseError(std::size_t line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message),
        line_number(line) {}
  std::size_t line_number;
};

inline std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> fields;
  std::string field;
  bool in_quotes = false;
  bool at_field_start = true;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (in_quotes) {
      if (c != '"') {
        field += c;
      } else if (i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';  // doubled quote inside a quoted field
        ++i;
      } else {
        in_quotes = false;
      }
    } else if (c == '"' && at_field_start) {
      in_quotes = true;
      at_field_start = false;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      at_field_start = true;
    } else {
      field += c;
      at_field_start = false;
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

// Quotes a field only when it needs it.
inline std::string quote_field(std::string_view field) {
  if (field.find_first_of(",\"") == std::string_view::npos) return std::string(field);
  std::string quoted = "\"";
  for (char c : field) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

inline std::uint64_t parse_u64(std::string_view field, std::size_t line,
                               std::string_view column) {
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw ParseError(line, "bad integer in column '" + std::string(column) + "': '" +
                               std::string(field) + "'");
  }
  return value;
}

inline std::uint32_t parse_u32(std::string_view field, std::size_t line,
                               std::string_view column) {
  std::uint64_t value = parse_u64(field, line, column);
  if (value > 0xffffffffULL) {
    throw ParseError(line, "value out of range in column '" + std::string(column) + "'");
  }
  return static_cast<std::uint32_t>(value);
}

inline double parse_double(std::string_view field, std::size_t line,
                           std::string_view column) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw ParseError(line, "bad number in column '" + std::string(column) + "': '" +
                               std::string(field) + "'");
  }
  return value;
}

// Round-trip exact formatting so re-parsing a dump reproduces the value
// bit for bit.
inline std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

}  // namespace edgestream
