#pragma once

// Non-backtracking transfer matrices for letter-weight functionals on F_k.
//
// Rows and columns are indexed by letters; entry (u, v) is
// exp(-(t * wstar[v] + s * w[v])) when v is not u^-1 and 0 otherwise, so
// the two-variable growth series sum_x exp(-t d_*(o,x) - s d(o,x)) converges
// exactly when the spectral radius is below 1.

#include <span>
#include <vector>

namespace mstruct {

struct TransferRadius {
  double log_radius = 0.0;
  /// Perron residual of the rescaled matrix, relative to its radius.
  double residual = 0.0;
};

/// Weights are per generator; inverse letters share their generator's weight.
TransferRadius transfer_log_radius(std::span<const double> wstar, std::span<const double> w,
                                   double t, double s, std::vector<double>* warm_start = nullptr);

struct TransferSolution {
  double s = 0.0;
  /// |rho(M(t, s)) - 1| at the returned s.
  double residual = 0.0;
  int bisection_steps = 0;
};

/// The unique s with rho(M(t, s)) = 1, by bisection from the bracket [lo, hi],
/// expanded geometrically until it straddles the root. Requires every w > 0.
/// Throws Error(bracket_failure) naming the scanned interval.
TransferSolution solve_transfer(std::span<const double> wstar, std::span<const double> w, double t,
                                double lo, double hi);

}  // namespace mstruct
