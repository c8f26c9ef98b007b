#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace docplan::text {

/// Characters that may appear inside a CLI token: [A-Za-z0-9_-].
constexpr bool is_word_char(char c) noexcept {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
         c == '_' || c == '-';
}

constexpr bool is_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

/// True when `needle` occurs in `haystack` at `pos` with word boundaries on
/// both sides. An edge of the needle that is itself a non-word character needs
/// no boundary there.
bool matches_at_boundary(std::string_view haystack, std::size_t pos, std::string_view needle);

std::string_view trim(std::string_view s);

/// Maximal runs of non-whitespace.
std::vector<std::string_view> split_words(std::string_view s);

std::string join_words(const std::vector<std::string_view>& words, std::size_t count);

/// Splits on '\n'; a trailing '\r' is dropped from each line.
std::vector<std::string> split_lines(std::string_view s);

/// Trims and collapses every whitespace run to a single space.
std::string collapse_whitespace(std::string_view s);

bool is_valid_utf8(std::string_view s);

std::string sha256_hex(std::string_view data);

/// Fixed-point rendering with `digits` decimals ("%.*f").
std::string fixed(double value, int digits);

}  // namespace docplan::text
