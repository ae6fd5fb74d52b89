#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

// UTF-8 text helpers shared by the ingest and keyword filtering code.
namespace stancekit::text {

// NFC-normalize and apply simple lowercase mapping. Invalid UTF-8 sequences
// become U+FFFD.
std::string to_lower(std::string_view utf8);

// Split on runs of Unicode whitespace.
std::vector<std::string_view> split_whitespace(std::string_view utf8);

std::size_t count_tokens(std::string_view utf8);

// True when `needle` occurs in `haystack` with no letter or digit immediately
// before or after the occurrence.
bool contains_whole_word(std::string_view haystack, std::string_view needle);

}  // namespace stancekit::text
