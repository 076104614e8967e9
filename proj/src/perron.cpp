#include "mstruct/perron.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "mstruct/error.hpp"

namespace mstruct {

PerronResult perron_root(std::span<const double> matrix, std::size_t n, double tolerance,
                         int max_iterations, std::span<const double> start) {
  if (matrix.size() != n * n) {
    throw Error(ErrorKind::invalid_input, "matrix size does not match dimension");
  }
  PerronResult result;
  if (n == 0) return result;

  std::vector<double> v(n, 1.0);
  if (start.size() == n && std::all_of(start.begin(), start.end(), [](double x) { return x > 0; })) {
    v.assign(start.begin(), start.end());
  }
  std::vector<double> w(n);
  double lo = 0.0;
  double hi = 0.0;
  bool converged = false;
  int it = 0;
  for (; it < max_iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      double acc = v[i];
      const double* row = matrix.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) acc += row[j] * v[j];
      w[i] = acc;
    }
    lo = std::numeric_limits<double>::infinity();
    hi = 0.0;
    double wmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (v[i] > 0) {
        const double ratio = w[i] / v[i];
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
      }
      wmax = std::max(wmax, w[i]);
    }
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / wmax;
    if (hi - lo <= tolerance * hi) {
      converged = true;
      ++it;
      break;
    }
  }
  if (!converged) {
    throw Error(ErrorKind::non_convergence,
                fmt::format("power iteration did not converge after {} iterations (bounds {} .. {})",
                            it, lo - 1.0, hi - 1.0));
  }
  result.radius = std::max(0.0, 0.5 * (lo + hi) - 1.0);
  result.iterations = it;
  double vmax = 0.0;
  double rmax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    const double* row = matrix.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) acc += row[j] * v[j];
    rmax = std::max(rmax, std::abs(acc - result.radius * v[i]));
    vmax = std::max(vmax, std::abs(v[i]));
  }
  result.residual = vmax > 0 ? rmax / vmax : 0.0;
  result.vector = std::move(v);
  return result;
}

}  // namespace mstruct
