#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mstruct {

struct PerronResult {
  double radius = 0.0;
  /// ||A v - radius v||_inf / ||v||_inf at the returned vector.
  double residual = 0.0;
  int iterations = 0;
  std::vector<double> vector;
};

/// Spectral radius of a dense row-major nonnegative n x n matrix.
///
/// Power iteration on I + A, which is primitive whenever A is irreducible, so
/// periodic components (permutation matrices) converge too. Iteration stops
/// once the Collatz-Wielandt bounds min/max (Bv)_i / v_i agree to `tolerance`
/// relative. Throws Error(non_convergence) after `max_iterations`.
PerronResult perron_root(std::span<const double> matrix, std::size_t n,
                         double tolerance = 1e-12, int max_iterations = 100000,
                         std::span<const double> start = {});

}  // namespace mstruct
