#pragma once

#include <string>
#include <string_view>

namespace stancekit::text::detail {

// Invalid sequences decode to U+FFFD.
std::u32string decode(std::string_view utf8);
std::string encode(std::u32string_view codepoints);

std::string nfc(std::string_view utf8);

bool is_space(char32_t c) noexcept;
bool is_letter(char32_t c) noexcept;
bool is_digit(char32_t c) noexcept;
char32_t lower(char32_t c) noexcept;

}  // namespace stancekit::text::detail
