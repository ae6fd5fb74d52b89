#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>

#include <json.hpp>

namespace stancekit::detail {

using json = nlohmann::json;

std::string read_file(const std::filesystem::path& path);

// Writes through a temporary file and renames it into place.
void write_file(const std::filesystem::path& path, std::string_view contents);

// Calls `fn(line, line_number)` for every non-blank line (1-based numbers).
void for_each_line(std::string_view text, const std::function<void(std::string_view, std::size_t)>& fn);

// Parses one JSONL record; throws ParseError with the line number.
json parse_json_line(std::string_view line, const std::string& source, std::size_t line_number);

// Required field accessors; throw ParseError naming the field.
std::string require_string(const json& record, const char* field, const std::string& source, std::size_t line);
double require_number(const json& record, const char* field, const std::string& source, std::size_t line);
int require_int(const json& record, const char* field, const std::string& source, std::size_t line);

}  // namespace stancekit::detail
