#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace cmv {

std::string to_lower_ascii(std::string_view s);
std::string_view trim(std::string_view s);
std::vector<std::string_view> split_lines(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
bool contains_word_ci(std::string_view text, std::string_view word);

/// Decodes one UTF-8 code point at `pos`, advancing it. Invalid bytes decode
/// as themselves so that scanning always makes progress.
char32_t next_code_point(std::string_view s, std::size_t& pos);
void append_utf8(std::string& out, char32_t cp);

/// Days since 1970-01-01 for a proleptic Gregorian date.
std::int64_t days_from_civil(int y, unsigned m, unsigned d);
/// Parses "YYYY-MM-DD" to UTC epoch seconds at midnight.
std::int64_t parse_date_utc(std::string_view ymd);
/// "YYYY-MM" of an epoch timestamp.
std::string year_month(std::int64_t epoch_seconds);

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 14695981039346656037ull);
std::string hex64(std::uint64_t v);

/// Shortest round-trip representation; NaN prints as an empty string.
std::string format_double(double v);
std::string csv_escape(std::string_view field);
std::vector<std::string> parse_csv_line(std::string_view line);

/// Uniform integer in [0, n) that does not depend on the standard library's
/// distribution implementation, so sampled results are portable.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n);

}  // namespace cmv
