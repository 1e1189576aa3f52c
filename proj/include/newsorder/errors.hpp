#pragma once

#include <stdexcept>
#include <string>

namespace newsorder {

/// Input violates a documented precondition (bad index, malformed permutation, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The inputs are valid individually but leave the requested quantity undefined.
class DegenerateInput : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An exact or expanded-graph method was asked to run above its size gate.
class ResourceLimit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File ingestion failure. `line()` is 1-based, 0 when not tied to a line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace newsorder
