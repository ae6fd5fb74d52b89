#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stancekit {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input that does not satisfy a documented precondition or invariant.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A file or record could not be parsed. `line` is 1-based; 0 means "whole file".
class ParseError : public Error {
 public:
  ParseError(std::string source, std::size_t line, const std::string& what);

  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string source_;
  std::size_t line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace stancekit
