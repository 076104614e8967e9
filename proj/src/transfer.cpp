#include "mstruct/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "mstruct/error.hpp"
#include "mstruct/perron.hpp"

namespace mstruct {

TransferRadius transfer_log_radius(std::span<const double> wstar, std::span<const double> w,
                                   double t, double s, std::vector<double>* warm_start) {
  if (wstar.size() != w.size() || w.size() < 2) {
    throw Error(ErrorKind::invalid_input, "weight vectors must share a rank >= 2");
  }
  const std::size_t n = 2 * w.size();
  std::vector<double> exponent(n);
  for (std::size_t v = 0; v < n; ++v) exponent[v] = -(t * wstar[v / 2] + s * w[v / 2]);
  const double top = *std::max_element(exponent.begin(), exponent.end());

  std::vector<double> matrix(n * n, 0.0);
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) {
      if ((u ^ 1) == v) continue;
      matrix[u * n + v] = std::exp(exponent[v] - top);
    }
  }
  std::span<const double> start;
  if (warm_start != nullptr) start = *warm_start;
  PerronResult root = perron_root(matrix, n, 1e-15, 100000, start);
  if (warm_start != nullptr) *warm_start = root.vector;
  return TransferRadius{top + std::log(root.radius), root.residual / root.radius};
}

TransferSolution solve_transfer(std::span<const double> wstar, std::span<const double> w, double t,
                                double lo, double hi) {
  if (std::any_of(w.begin(), w.end(), [](double x) { return !(x > 0); })) {
    throw Error(ErrorKind::invalid_input, "transfer root needs strictly positive weights");
  }
  std::vector<double> warm;
  auto f = [&](double s) { return transfer_log_radius(wstar, w, t, s, &warm).log_radius; };

  const double scanned_lo = lo;
  const double scanned_hi = hi;
  double width = std::max(1.0, hi - lo);
  int expansions = 0;
  // log rho is strictly decreasing in s.
  while (f(lo) <= 0.0) {
    if (++expansions > 60) {
      throw Error(ErrorKind::bracket_failure,
                  fmt::format("no lower bracket found scanning [{}, {}]", lo, scanned_hi));
    }
    hi = lo;
    lo -= width;
    width *= 2;
  }
  while (f(hi) >= 0.0) {
    if (++expansions > 60) {
      throw Error(ErrorKind::bracket_failure,
                  fmt::format("no upper bracket found scanning [{}, {}]", scanned_lo, hi));
    }
    lo = hi;
    hi += width;
    width *= 2;
  }

  TransferSolution sol;
  for (; sol.bisection_steps < 200; ++sol.bisection_steps) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double value = f(mid);
    if (value == 0.0) {
      lo = hi = mid;
      break;
    }
    (value > 0.0 ? lo : hi) = mid;
  }
  sol.s = 0.5 * (lo + hi);
  sol.residual = std::abs(std::expm1(f(sol.s)));
  return sol;
}

}  // namespace mstruct
