#pragma once

#include <stdexcept>
#include <string>

namespace mstruct {

enum class ErrorKind {
  invalid_input,
  context_mismatch,
  empty_class,
  budget_exceeded,
  parse_error,
  non_convergence,
  witness_not_found,
  capability_missing,
  not_symmetric,
  not_generating,
  negative_length,
  bracket_failure,
  degenerate_pair,
  boundary_pair,
  inconsistent_boundary,
  radius_too_small,
  out_of_range,
};

const char* to_string(ErrorKind kind) noexcept;

/// Exception carrying a machine-readable kind; the CLI maps kinds to exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace mstruct
