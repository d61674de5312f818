#pragma once

#include <stdexcept>
#include <string>

namespace lojalab {

enum class ErrorKind {
  contract_violation,
  numerical_failure,
  domain_error,
  constraint_degeneracy,
  retraction_failure,
  surjectivity_failure,
  chart_domain_exceeded,
  chart_degeneracy,
  step_rejection,
  search_failure,
  ill_conditioned_fit,
  config_error,
};

const char* to_string(ErrorKind kind);

/// Single exception type for the library; the kind says which contract broke.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

inline void require(bool condition, const std::string& what) {
  if (!condition) fail(ErrorKind::contract_violation, what);
}

}  // namespace lojalab
