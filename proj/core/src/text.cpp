#include "stancekit/text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "stancekit/error.hpp"
#include "text_internal.hpp"

namespace stancekit::text {

namespace detail {

std::u32string decode(std::string_view utf8) {
  std::u32string out;
  out.reserve(utf8.size());
  const auto* bytes = reinterpret_cast<const uint8_t*>(utf8.data());
  const auto length = static_cast<int32_t>(utf8.size());
  int32_t i = 0;
  while (i < length) {
    UChar32 c;
    U8_NEXT(bytes, i, length, c);
    out.push_back(c < 0 ? U'�' : static_cast<char32_t>(c));
  }
  return out;
}

std::string encode(std::u32string_view codepoints) {
  std::string out;
  out.reserve(codepoints.size());
  for (char32_t c : codepoints) {
    if (c > 0x10FFFF || U_IS_SURROGATE(c)) c = 0xFFFD;
    uint8_t buf[U8_MAX_LENGTH];
    int32_t n = 0;
    U8_APPEND_UNSAFE(buf, n, static_cast<UChar32>(c));
    out.append(reinterpret_cast<const char*>(buf), static_cast<std::size_t>(n));
  }
  return out;
}

std::string nfc(std::string_view utf8) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* normalizer = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error("ICU NFC normalizer unavailable");
  auto source = icu::UnicodeString::fromUTF8(icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
  icu::UnicodeString normalized = normalizer->normalize(source, status);
  if (U_FAILURE(status)) throw Error("NFC normalization failed");
  std::string out;
  normalized.toUTF8String(out);
  return out;
}

bool is_space(char32_t c) noexcept { return u_isUWhiteSpace(static_cast<UChar32>(c)); }
bool is_letter(char32_t c) noexcept { return u_isalpha(static_cast<UChar32>(c)); }
bool is_digit(char32_t c) noexcept { return u_isdigit(static_cast<UChar32>(c)); }
char32_t lower(char32_t c) noexcept { return static_cast<char32_t>(u_tolower(static_cast<UChar32>(c))); }

}  // namespace detail

std::string to_lower(std::string_view utf8) {
  auto codepoints = detail::decode(detail::nfc(utf8));
  for (auto& c : codepoints) c = detail::lower(c);
  return detail::encode(codepoints);
}

std::vector<std::string_view> split_whitespace(std::string_view utf8) {
  std::vector<std::string_view> tokens;
  const auto* bytes = reinterpret_cast<const uint8_t*>(utf8.data());
  const auto length = static_cast<int32_t>(utf8.size());
  int32_t i = 0;
  int32_t token_start = -1;
  while (i < length) {
    const int32_t start = i;
    UChar32 c;
    U8_NEXT(bytes, i, length, c);
    const bool space = c >= 0 && detail::is_space(static_cast<char32_t>(c));
    if (space && token_start >= 0) {
      tokens.push_back(utf8.substr(static_cast<std::size_t>(token_start), static_cast<std::size_t>(start - token_start)));
      token_start = -1;
    } else if (!space && token_start < 0) {
      token_start = start;
    }
  }
  if (token_start >= 0) tokens.push_back(utf8.substr(static_cast<std::size_t>(token_start)));
  return tokens;
}

std::size_t count_tokens(std::string_view utf8) { return split_whitespace(utf8).size(); }

bool contains_whole_word(std::string_view haystack, std::string_view needle) {
  if (needle.empty()) return false;
  const auto text = detail::decode(haystack);
  const auto word = detail::decode(needle);
  auto is_word_char = [](char32_t c) { return detail::is_letter(c) || detail::is_digit(c); };
  for (auto pos = text.find(word); pos != std::u32string::npos; pos = text.find(word, pos + 1)) {
    const bool left_ok = pos == 0 || !is_word_char(text[pos - 1]);
    const auto end = pos + word.size();
    const bool right_ok = end == text.size() || !is_word_char(text[end]);
    if (left_ok && right_ok) return true;
  }
  return false;
}

}  // namespace stancekit::text
