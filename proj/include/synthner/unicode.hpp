#pragma once

#include <cstddef>
#include <string>
#include <string_view>

// UTF-8 <-> code point helpers. Every offset in synthner counts Unicode code
// points of the decoded text, never bytes.
namespace synthner::unicode {

// Ill-formed byte sequences decode to U+FFFD.
std::u32string decode(std::string_view utf8);
std::string encode(std::u32string_view text);

std::size_t length(std::string_view utf8);

// Code points [start, end) of utf8, clamped to its length.
std::string substr(std::string_view utf8, std::size_t start, std::size_t end);

bool is_space(char32_t c);

std::string nfc(std::string_view utf8);

}  // namespace synthner::unicode
