#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace itinera::text {

/// Replaces every invalid UTF-8 sequence with U+FFFD.
std::string sanitize_utf8(std::string_view bytes);
bool is_valid_utf8(std::string_view bytes);

std::vector<char32_t> decode_utf8(std::string_view s);
void append_utf8(std::string& out, char32_t cp);

/// Lower-cases ASCII and strips Latin diacritics ("Università" -> "universita").
std::string fold(std::string_view s);

std::string to_lower_ascii(std::string_view s);
std::string_view trim(std::string_view s);
std::vector<std::string> split_whitespace(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Collapses runs of whitespace into one space and trims.
std::string normalize_whitespace(std::string_view s);

/// Splits folded text into alphanumeric words.
std::vector<std::string> words(std::string_view s);

bool starts_with_upper(std::string_view word);

/// Levenshtein distance over code points.
std::size_t edit_distance(std::string_view a, std::string_view b);

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t value);

/// "HH:MM" for minutes from midnight.
std::string format_clock(int minutes);

}  // namespace itinera::text
