// Copyright 2026 The pon-vdba Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ponvdba/errors.hpp"

namespace ponvdba::detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    out.push_back(trim(line.substr(pos, comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

// Blank lines, '#' comments and a header row (first field not numeric) are
// skipped by every trace reader.
inline bool skippable_line(std::string_view line) {
  line = trim(line);
  if (line.empty() || line.front() == '#') return true;
  return !(line.front() >= '0' && line.front() <= '9');
}

template <typename T>
T parse_uint(std::string_view field, std::size_t line_no) {
  T value{};
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ParseError("line " + std::to_string(line_no) + ": bad integer field '" +
                     std::string(field) + "'");
  }
  return value;
}

}  // namespace ponvdba::detail
