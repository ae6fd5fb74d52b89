#include "io_util.hpp"

#include <fstream>
#include <sstream>

#include "stancekit/error.hpp"

namespace stancekit::detail {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError("error reading " + path.string());
  return std::move(buffer).str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw IoError("error writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void for_each_line(std::string_view text, const std::function<void(std::string_view, std::size_t)>& fn) {
  std::size_t line_number = 0;
  while (!text.empty()) {
    ++line_number;
    auto end = text.find('\n');
    auto line = text.substr(0, end);
    text = end == std::string_view::npos ? std::string_view{} : text.substr(end + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    fn(line, line_number);
  }
}

json parse_json_line(std::string_view line, const std::string& source, std::size_t line_number) {
  json record = json::parse(line, nullptr, false);
  if (record.is_discarded()) throw ParseError(source, line_number, "malformed JSON");
  if (!record.is_object()) throw ParseError(source, line_number, "expected a JSON object");
  return record;
}

std::string require_string(const json& record, const char* field, const std::string& source, std::size_t line) {
  auto it = record.find(field);
  if (it == record.end()) throw ParseError(source, line, std::string("missing field '") + field + "'");
  if (!it->is_string()) throw ParseError(source, line, std::string("field '") + field + "' must be a string");
  return it->get<std::string>();
}

double require_number(const json& record, const char* field, const std::string& source, std::size_t line) {
  auto it = record.find(field);
  if (it == record.end()) throw ParseError(source, line, std::string("missing field '") + field + "'");
  if (!it->is_number()) throw ParseError(source, line, std::string("field '") + field + "' must be a number");
  return it->get<double>();
}

int require_int(const json& record, const char* field, const std::string& source, std::size_t line) {
  auto it = record.find(field);
  if (it == record.end()) throw ParseError(source, line, std::string("missing field '") + field + "'");
  if (!it->is_number_integer()) throw ParseError(source, line, std::string("field '") + field + "' must be an integer");
  return it->get<int>();
}

}  // namespace stancekit::detail
