#include "mstruct/manhattan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include <fmt/format.h>

#include "fit.hpp"
#include "mstruct/error.hpp"
#include "mstruct/transfer.hpp"

namespace mstruct {

namespace {

constexpr double kExactPerronTol = 1e-9;
constexpr double kExactConvexTol = 1e-8;
constexpr double kEmpiricalEndpointTol = 0.05;

std::vector<double> weight_form(const MetricProvider& p, bool positive) {
  auto form = p.letter_weight_form();
  if (!form) {
    throw Error(ErrorKind::invalid_input,
                fmt::format("exact curve needs letter-weight functionals; '{}' is not one", p.name()));
  }
  for (double w : *form) {
    if (positive ? !(w > 0) : !(w >= 0)) {
      throw Error(ErrorKind::invalid_input,
                  fmt::format("'{}' has a letter weight {} outside the admissible range", p.name(), w));
    }
  }
  return *form;
}

double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

}  // namespace

std::string_view to_string(CurveMethod m) {
  return m == CurveMethod::exact ? "exact" : "empirical";
}

CurveMethod parse_curve_method(std::string_view text) {
  if (text == "exact") return CurveMethod::exact;
  if (text == "empirical") return CurveMethod::empirical;
  throw Error(ErrorKind::invalid_input, fmt::format("unknown method '{}'", text));
}

ThetaValue theta_exact(const MetricProvider& p_star, const MetricProvider& p, double t) {
  if (!(p_star.context() == p.context())) {
    throw Error(ErrorKind::context_mismatch, "pair lives on different groups");
  }
  const auto ws = weight_form(p_star, false);
  const auto w = weight_form(p, true);
  double ratio = 0.0;
  double top_star = 0.0;
  for (std::size_t g = 0; g < w.size(); ++g) {
    ratio = std::max(ratio, ws[g] / w[g]);
    top_star = std::max(top_star, ws[g]);
  }
  // h(d) <= log(2k - 1) / min w stands in for h(d) in the seed bracket.
  const double h_bound =
      std::log(p.context().alphabet_size() - 1.0) / *std::min_element(w.begin(), w.end());
  const double lo = -t * ratio - 1.0;
  const double hi = std::max(lo + 1.0, h_bound + std::abs(t) * top_star + 1.0);
  const TransferSolution sol = solve_transfer(ws, w, t, lo, hi);
  return {sol.s, sol.residual, CurveMethod::exact};
}

ThetaValue theta_empirical(const MetricProvider& p_star, const MetricProvider& p, double t,
                           int radius) {
  if (radius < 6) {
    throw Error(ErrorKind::radius_too_small,
                fmt::format("empirical curve needs radius >= 6, got {}", radius));
  }
  if (!(p_star.context() == p.context())) {
    throw Error(ErrorKind::context_mismatch, "pair lives on different groups");
  }
  if (!p_star.capabilities().has_distance) {
    throw Error(ErrorKind::capability_missing,
                fmt::format("provider '{}' has no distance capability", p_star.name()));
  }
  std::vector<double> log_shell(static_cast<std::size_t>(radius) + 1,
                                -std::numeric_limits<double>::infinity());
  p.for_each_in_ball(radius, [&](std::span<const Letter> x, double d) {
    const double bin = std::ceil(d - 1e-9);
    if (bin < 1 || bin > radius) return;
    double& slot = log_shell[static_cast<std::size_t>(bin)];
    slot = log_add(slot, -t * p_star.distance_reduced(x));
  });
  std::vector<double> xs;
  std::vector<double> ys;
  for (int r = (radius + 1) / 2; r <= radius; ++r) {
    const double v = log_shell[static_cast<std::size_t>(r)];
    if (!std::isfinite(v)) continue;
    xs.push_back(r);
    ys.push_back(v);
  }
  if (xs.size() < 2) {
    throw Error(ErrorKind::invalid_input,
                fmt::format("shells of '{}' are empty in the top half of radius {}", p.name(), radius));
  }
  const detail::SlopeFit fit = detail::fit_slope(xs, ys);
  return {fit.slope, fit.stderr_slope, CurveMethod::empirical};
}

std::vector<double> make_grid(double lo, double hi, double step) {
  if (!(step > 0) || !std::isfinite(lo) || !std::isfinite(hi) || hi < lo) {
    throw Error(ErrorKind::invalid_input,
                fmt::format("invalid grid {}:{}:{}", lo, hi, step));
  }
  std::vector<double> out;
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 0.5));
  for (long i = 0; i <= n; ++i) out.push_back(lo + static_cast<double>(i) * step);
  return out;
}

std::vector<double> parse_grid(std::string_view spec) {
  std::vector<double> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t colon = spec.find(':', start);
    const std::string piece(spec.substr(start, colon == std::string_view::npos ? spec.npos : colon - start));
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(piece, &used));
      if (used != piece.size()) throw std::invalid_argument(piece);
    } catch (const std::exception&) {
      throw Error(ErrorKind::parse_error, fmt::format("grid '{}' is not lo:hi:step", spec));
    }
    if (colon == std::string_view::npos) break;
    start = colon + 1;
  }
  if (parts.size() != 3) {
    throw Error(ErrorKind::parse_error, fmt::format("grid '{}' is not lo:hi:step", spec));
  }
  return make_grid(parts[0], parts[1], parts[2]);
}

double ManhattanCurveModel::theta_at(double s) const {
  if (t.empty() || s < t.front() - 1e-12 || s > t.back() + 1e-12) {
    throw Error(ErrorKind::out_of_range,
                fmt::format("t = {} lies outside the curve's grid", s));
  }
  const auto it = std::lower_bound(t.begin(), t.end(), s - 1e-12);
  const auto i = static_cast<std::size_t>(it - t.begin());
  if (std::abs(t[i] - s) <= 1e-12 || i == 0) return theta[i];
  const double u = (s - t[i - 1]) / (t[i] - t[i - 1]);
  return (1 - u) * theta[i - 1] + u * theta[i];
}

ManhattanCurveModel build_curve(const MetricProvider& p_star, const MetricProvider& p,
                                const std::vector<double>& grid, CurveMethod method,
                                int empirical_radius) {
  if (grid.size() < 5) {
    throw Error(ErrorKind::invalid_input,
                fmt::format("curve grid needs at least 5 points, got {}", grid.size()));
  }
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw Error(ErrorKind::invalid_input, "curve grid must be increasing");
  }
  const bool exact = method == CurveMethod::exact;
  auto theta_of = [&](double t) {
    return exact ? theta_exact(p_star, p, t) : theta_empirical(p_star, p, t, empirical_radius);
  };

  ManhattanCurveModel model;
  model.star_name = p_star.name();
  model.name = p.name();
  model.method = method;
  model.t = grid;
  for (double t : grid) {
    const ThetaValue v = theta_of(t);
    model.theta.push_back(v.theta);
    model.residual.push_back(v.residual);
  }
  const std::size_t n = grid.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t a = i == 0 ? 0 : i - 1;
    const std::size_t b = i + 1 == n ? i : i + 1;
    model.theta_prime.push_back((model.theta[b] - model.theta[a]) / (grid[b] - grid[a]));
  }

  CurveValidation& v = model.validation;
  double max_residual = 0.0;
  for (double r : model.residual) max_residual = std::max(max_residual, r);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double slack = exact ? 0.0 : 2.0 * (model.residual[i] + model.residual[i + 1]);
    if (!(model.theta[i] > model.theta[i + 1] - slack)) v.monotone = false;
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double u = (grid[i] - grid[i - 1]) / (grid[i + 1] - grid[i - 1]);
    const double chord = (1 - u) * model.theta[i - 1] + u * model.theta[i + 1];
    const double tol = exact ? kExactConvexTol : 2.0 * model.residual[i];
    if (model.theta[i] > chord + tol) v.convex = false;
  }
  if (exact) {
    v.max_perron_residual = max_residual;
    v.perron_certified = max_residual <= kExactPerronTol;
  }

  if (exact) {
    model.h = growth_rate(p, GrowthMethod::exact_transfer_matrix).value;
    const auto ws = p_star.letter_weight_form();
    const bool star_metric =
        ws && std::all_of(ws->begin(), ws->end(), [](double x) { return x > 0; });
    model.h_star = star_metric ? growth_rate(p_star, GrowthMethod::exact_transfer_matrix).value
                               : std::numeric_limits<double>::quiet_NaN();
  } else {
    model.h = growth_rate(p, GrowthMethod::empirical_ball, empirical_radius).value;
    model.h_star = growth_rate(p_star, GrowthMethod::empirical_ball, empirical_radius).value;
  }
  const double endpoint_tol = exact ? kExactPerronTol : kEmpiricalEndpointTol;
  v.theta_at_zero_error = theta_of(0.0).theta - model.h;
  if (std::isfinite(model.h_star)) v.theta_at_h_star = theta_of(model.h_star).theta;
  v.endpoints_ok = std::abs(v.theta_at_zero_error) <= endpoint_tol &&
                   std::abs(v.theta_at_h_star) <= endpoint_tol;

  const double span = grid.back() - grid.front();
  for (std::size_t i = 0; i < n; ++i) {
    const double u = (grid[i] - grid.front()) / span;
    const double line = (1 - u) * model.theta.front() + u * model.theta.back();
    v.linear_deviation = std::max(v.linear_deviation, std::abs(model.theta[i] - line));
  }
  v.roughly_similar = exact && v.linear_deviation <= 1e-6;

  double step = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < n; ++i) step = std::min(step, grid[i] - grid[i - 1]);
  for (std::size_t i = 1; i < n; ++i) {
    v.max_derivative_jump =
        std::max(v.max_derivative_jump, std::abs(model.theta_prime[i] - model.theta_prime[i - 1]));
  }
  v.c1_proxy = v.max_derivative_jump <= 10.0 * step;

  if (!v.monotone) v.notes.push_back("theta is not decreasing on the grid");
  if (!v.convex) v.notes.push_back("midpoint convexity fails on the grid");
  if (!v.perron_certified) {
    v.notes.push_back(fmt::format("Perron residual {} exceeds {}", v.max_perron_residual, kExactPerronTol));
  }
  if (!v.endpoints_ok) {
    v.notes.push_back(fmt::format("endpoint identities off by {} and {}", v.theta_at_zero_error,
                                  v.theta_at_h_star));
  }
  if (v.roughly_similar) v.notes.push_back("linear: the pair is roughly similar");
  if (!v.c1_proxy) v.notes.push_back("theta' jumps by more than 10 grid steps");
  return model;
}

AsymptoticSlopes asymptotic_slopes(const ManhattanCurveModel& model, double t_far) {
  if (!(t_far > 0)) throw Error(ErrorKind::invalid_input, "t_far must be positive");
  return {model.theta_at(-t_far) / t_far, -model.theta_at(t_far) / t_far};
}

void write_curve_csv(const ManhattanCurveModel& model, std::ostream& out) {
  out << "t,theta,theta_prime,method,residual\n";
  for (std::size_t i = 0; i < model.t.size(); ++i) {
    out << fmt::format("{:.10g},{:.15g},{:.15g},{},{:.6e}\n", model.t[i], model.theta[i],
                       model.theta_prime[i], to_string(model.method), model.residual[i]);
  }
}

}  // namespace mstruct
