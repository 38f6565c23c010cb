#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace waterline {

enum class ErrorKind {
  Domain,
  InversionFailure,
  BracketFailure,
  InfeasibleBudget,
  InfeasibleTarget,
  SizeLimit,
  InvalidProblem,
  Schema,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Domain: return "DomainError";
    case ErrorKind::InversionFailure: return "InversionFailure";
    case ErrorKind::BracketFailure: return "BracketFailure";
    case ErrorKind::InfeasibleBudget: return "InfeasibleBudget";
    case ErrorKind::InfeasibleTarget: return "InfeasibleTarget";
    case ErrorKind::SizeLimit: return "SizeLimit";
    case ErrorKind::InvalidProblem: return "InvalidProblem";
    case ErrorKind::Schema: return "SchemaError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the kinds above so
/// callers (the CLI in particular) can map it onto an exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace waterline
