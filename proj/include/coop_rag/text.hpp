#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace coop_rag {

// Shared tokenizer for indexing and queries: ASCII-lowercase, split on every
// byte that is not [A-Za-z0-9] or part of a multi-byte UTF-8 sequence.
std::vector<std::string> tokenize(std::string_view text);

std::string to_lower_ascii(std::string_view text);
std::string to_upper_ascii(std::string_view text);
std::string trim(std::string_view text);
bool is_blank(std::string_view text) noexcept;
std::string normalize_newlines(std::string_view text);

// Splits at '.', '!' or '?' followed by whitespace or end of text. Sentences
// are returned trimmed, terminators included.
std::vector<std::string> split_sentences(std::string_view text);

std::string join(const std::vector<std::string> &parts, std::string_view sep);

namespace utf8 {

/// Code points of a UTF-8 string with the byte offset of each one.
/// `offsets` has one extra trailing entry equal to the byte length.
/// Invalid bytes decode to U+FFFD, one code point per offending byte.
struct Decoded {
  std::vector<char32_t> code_points;
  std::vector<std::size_t> offsets;

  [[nodiscard]] std::size_t size() const noexcept { return code_points.size(); }
};

Decoded decode(std::string_view text);
bool is_valid(std::string_view text) noexcept;
void append(std::string &out, char32_t cp);
bool is_space(char32_t cp) noexcept;

} // namespace utf8

} // namespace coop_rag
