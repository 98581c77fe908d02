// SPDX-License-Identifier: MIT
/**
 * @file text_io.hpp
 * @brief Exact decimal number I/O, key/value text parsing and file helpers.
 *
 * Doubles are written in shortest round-trip form, so a value written and
 * read back is bit-identical.
 */

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace fellerlab::text {

/// Shortest round-trip representation; integral values keep a trailing ".0".
std::string format_double(double value);

/// Parses a full token as a double (scientific notation accepted). Throws Error(Parse).
double parse_double(std::string_view token);

/// Parses a full token as a signed 64-bit integer. Throws Error(Parse).
std::int64_t parse_int(std::string_view token);

std::string_view trim(std::string_view s);

/// Splits on `sep`, trimming each piece. Empty input yields an empty list.
std::vector<std::string_view> split(std::string_view s, char sep);

std::vector<double> parse_double_list(std::string_view s, char sep = ',');
std::vector<std::int64_t> parse_int_list(std::string_view s, char sep = ',');

/// Flat `key = value` text. `#` starts a comment; blank lines are ignored.
/// Duplicate keys are rejected.
std::map<std::string, std::string> parse_key_values(std::string_view text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace fellerlab::text
