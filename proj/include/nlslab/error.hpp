#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nlslab {

enum class ErrorKind {
  invalid_exponent,
  inadmissible_coefficient,
  invalid_domain,
  domain_error,
  center_unsupported,
  out_of_range,
  convergence_failure,
  non_convergence,
  singular_operator,
  nonpositive_time,
  inner_non_convergence,
  config_error,
  missing_artifacts,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries a kind so callers (and the CLI
// exit-code mapping) can dispatch without parsing messages.
class LabError : public std::runtime_error {
 public:
  LabError(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace nlslab
