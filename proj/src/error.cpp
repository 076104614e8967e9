#include "mstruct/error.hpp"

namespace mstruct {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_input: return "invalid-input";
    case ErrorKind::context_mismatch: return "context-mismatch";
    case ErrorKind::empty_class: return "empty-class";
    case ErrorKind::budget_exceeded: return "budget-exceeded";
    case ErrorKind::parse_error: return "parse-error";
    case ErrorKind::non_convergence: return "non-convergence";
    case ErrorKind::witness_not_found: return "witness-not-found";
    case ErrorKind::capability_missing: return "capability-missing";
    case ErrorKind::not_symmetric: return "not-symmetric";
    case ErrorKind::not_generating: return "not-generating";
    case ErrorKind::negative_length: return "negative-length";
    case ErrorKind::bracket_failure: return "bracket-failure";
    case ErrorKind::degenerate_pair: return "degenerate-pair";
    case ErrorKind::boundary_pair: return "boundary-pair";
    case ErrorKind::inconsistent_boundary: return "inconsistent-boundary";
    case ErrorKind::radius_too_small: return "radius-too-small";
    case ErrorKind::out_of_range: return "out-of-range";
  }
  return "unknown";
}

}  // namespace mstruct
