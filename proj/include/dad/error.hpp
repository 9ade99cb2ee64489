#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dad {

// Base for every error raised by the library. Certificate violations are not
// errors: they are returned as values.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An enumeration or arithmetic guard tripped (element cap, bound cap, ...).
class ResourceCapError : public Error {
 public:
  using Error::Error;
};

// A group element was not found inside the capped enumeration.
class NotReachedError : public Error {
 public:
  using Error::Error;
};

// An operation was called outside its documented precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace dad
