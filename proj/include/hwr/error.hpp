#pragma once

#include <stdexcept>
#include <string>

namespace hwr {

enum class ErrorCode {
  dimension,
  parameter,
  too_many_blocks,
  empty_ink,
  invalid_index,
  zero_variance,
  undefined_silhouette,
  coverage,
  structure,
  label_range,
  mismatch,
  class_too_small,
  io,
  format,
  checksum,
  unsupported_version,
};

const char* to_string(ErrorCode code);

/// Library-wide exception. `code()` identifies the failure class so callers
/// and tests can branch on it without parsing the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

  ErrorCode code() const noexcept { return code_; }
  /// The message without the error-kind prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace hwr
