#pragma once

#include <stdexcept>
#include <string>

namespace qrn {

enum class ErrorKind {
  dimension_mismatch,
  dimension_limit,
  invalid_argument,
  invariant_violation,
  null_restriction,
  zero_branch,
  empty_intersection,
  noncommuting_pair,
  preparation_failed,
  grid_too_coarse,
  modulus_search_failed,
  hypothesis_not_met,
  width_precondition,
  config_invalid,
  io_failure,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::dimension_mismatch: return "dimension_mismatch";
    case ErrorKind::dimension_limit: return "dimension_limit";
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::invariant_violation: return "invariant_violation";
    case ErrorKind::null_restriction: return "null_restriction";
    case ErrorKind::zero_branch: return "zero_branch";
    case ErrorKind::empty_intersection: return "empty_intersection";
    case ErrorKind::noncommuting_pair: return "noncommuting_pair";
    case ErrorKind::preparation_failed: return "preparation_failed";
    case ErrorKind::grid_too_coarse: return "grid_too_coarse";
    case ErrorKind::modulus_search_failed: return "modulus_search_failed";
    case ErrorKind::hypothesis_not_met: return "hypothesis_not_met";
    case ErrorKind::width_precondition: return "width_precondition";
    case ErrorKind::config_invalid: return "config_invalid";
    case ErrorKind::io_failure: return "io_failure";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace qrn
