#include "stancekit/error.hpp"

namespace stancekit {

namespace {
std::string format_parse_error(const std::string& source, std::size_t line, const std::string& what) {
  if (line == 0) return source + ": " + what;
  return source + ":" + std::to_string(line) + ": " + what;
}
}  // namespace

ParseError::ParseError(std::string source, std::size_t line, const std::string& what)
    : Error(format_parse_error(source, line, what)), source_(std::move(source)), line_(line) {}

}  // namespace stancekit
