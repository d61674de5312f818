#include "lojalab/error.hpp"

namespace lojalab {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::contract_violation: return "contract violation";
    case ErrorKind::numerical_failure: return "numerical failure";
    case ErrorKind::domain_error: return "domain error";
    case ErrorKind::constraint_degeneracy: return "constraint degeneracy";
    case ErrorKind::retraction_failure: return "retraction failure";
    case ErrorKind::surjectivity_failure: return "surjectivity failure";
    case ErrorKind::chart_domain_exceeded: return "chart domain exceeded";
    case ErrorKind::chart_degeneracy: return "chart degeneracy";
    case ErrorKind::step_rejection: return "step rejection";
    case ErrorKind::search_failure: return "search failure";
    case ErrorKind::ill_conditioned_fit: return "ill-conditioned fit";
    case ErrorKind::config_error: return "config error";
  }
  return "unknown error";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace lojalab
