#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace twicing {

/// Precondition violated by the caller (bad shape, out-of-range argument).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An iterative or guarded computation could not produce a finite answer.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file. `offset` is the byte position where parsing stopped.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace twicing
