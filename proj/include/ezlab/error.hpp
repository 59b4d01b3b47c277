#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ezlab {

enum class ErrorCode {
  invalid_argument,
  contains_origin,
  non_finite,
  non_monotone_weight,
  zero_real_part,
  overlap,
  empty_cluster,
  coverage,
  non_converged,
  parse,
  io,
  config,
  internal,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries one of the codes above so the
// C boundary can translate it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ezlab
