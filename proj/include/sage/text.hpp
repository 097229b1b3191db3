#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace sage::text {

bool is_ascii_space(char c);
bool is_unicode_space(char32_t cp);

// Strips leading and trailing Unicode whitespace (ASCII whitespace, NBSP,
// the general-punctuation spaces, ideographic space, ...). Malformed UTF-8
// bytes are treated as opaque and never stripped.
std::string_view trim(std::string_view s);

// Splits on runs of ASCII whitespace; no empty tokens.
std::vector<std::string_view> split_ws(std::string_view s);

// Lowercases ASCII letters only; other bytes pass through.
std::string ascii_lower(std::string_view s);

// Decodes one UTF-8 code point starting at byte i. Returns the code point
// and advances i past it; malformed sequences yield U+FFFD and advance by
// one byte.
char32_t decode_utf8(std::string_view s, std::size_t& i);

}  // namespace sage::text
