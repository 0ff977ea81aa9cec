#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace orbi {

enum class ErrorCode {
  non_square,
  dim_mismatch,
  evaluation_error,
  not_finite,
  singular,
  budget_exceeded,
  ambiguous_canonical,
  not_orbit_preserving,
  ambiguous,
  inconsistent,
  step_too_large,
  seed_off_orbit,
  obstruction_found,
  no_consistent_image,
  not_homomorphism,
  singular_jacobian,
  no_group_element,
  no_factor,
  identification_incomplete,
  empty_restriction,
  out_of_chart,
  parse_error,
  invalid_argument,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI) can map it to a report entry or an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace orbi
