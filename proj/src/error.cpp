#include "nlslab/error.hpp"

namespace nlslab {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_exponent: return "InvalidExponent";
    case ErrorKind::inadmissible_coefficient: return "InadmissibleCoefficient";
    case ErrorKind::invalid_domain: return "InvalidDomain";
    case ErrorKind::domain_error: return "DomainError";
    case ErrorKind::center_unsupported: return "CenterUnsupported";
    case ErrorKind::out_of_range: return "OutOfRange";
    case ErrorKind::convergence_failure: return "ConvergenceFailure";
    case ErrorKind::non_convergence: return "NonConvergence";
    case ErrorKind::singular_operator: return "SingularOperator";
    case ErrorKind::nonpositive_time: return "NonpositiveTime";
    case ErrorKind::inner_non_convergence: return "InnerNonConvergence";
    case ErrorKind::config_error: return "ConfigError";
    case ErrorKind::missing_artifacts: return "MissingArtifacts";
  }
  return "Unknown";
}

}  // namespace nlslab
