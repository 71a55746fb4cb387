#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fastmuygps {

/// Numerical failure (e.g. a covariance block that stays indefinite after
/// jitter escalation). Carries enough context to identify the failing solve.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or truncated on-disk data. byte_offset() is the position in the
/// stream at which parsing failed.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::size_t byte_offset)
      : std::runtime_error(what + " (at byte offset " +
                           std::to_string(byte_offset) + ")"),
        byte_offset_(byte_offset) {}

  std::size_t byte_offset() const noexcept { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

}  // namespace fastmuygps
