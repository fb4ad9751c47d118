#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace wikitables::unicode {

inline constexpr char32_t kReplacement = 0xFFFD;

/// Decodes one code point at `pos` and advances it. Malformed sequences
/// yield U+FFFD and consume a single byte.
char32_t next_code_point(std::string_view text, std::size_t& pos);

void append_utf8(std::string& out, char32_t cp);

bool valid_utf8(std::string_view text);

/// White_Space property.
bool is_whitespace(char32_t cp);

/// General category L*.
bool is_letter(char32_t cp);

/// Cc (except whitespace) and Cf code points; removed from cell text.
bool is_invisible_control(char32_t cp);

/// Trims, maps every whitespace run to one U+0020, drops control and format
/// characters.
std::string collapse_whitespace(std::string_view text);

/// Maximal runs of non-whitespace code points.
std::vector<std::string> split_words(std::string_view text);

/// NFKC case-folded form, used for case-insensitive matching.
std::string fold_case(std::string_view text);

}  // namespace wikitables::unicode
