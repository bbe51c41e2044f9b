#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mdms {

// Malformed input text. line() is 1-based and refers to the raw input.
class ParseError : public std::runtime_error {
public:
  ParseError(std::size_t line, const std::string &what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

// A series too short to hold a single window pair.
class LengthError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Window length, exclusion divisor, mask layout or similar does not fit the input.
class InfeasibleError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace mdms
