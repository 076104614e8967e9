#pragma once

// The Manhattan curve of a pair (d_*, d): theta(t) is the abscissa of
// convergence of s -> sum_x exp(-t d_*(o,x) - s d(o,x)).

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "mstruct/metrics.hpp"

namespace mstruct {

enum class CurveMethod { exact, empirical };

std::string_view to_string(CurveMethod m);
CurveMethod parse_curve_method(std::string_view text);

struct ThetaValue {
  double theta = 0.0;
  /// |rho - 1| for exact values, standard error of the fitted slope otherwise.
  double residual = 0.0;
  CurveMethod method = CurveMethod::exact;
};

/// Requires letter-weight forms, with strictly positive weights for p.
ThetaValue theta_exact(const MetricProvider& p_star, const MetricProvider& p, double t);

/// Slope of log a_R against R, a_R = sum over ceil(d(o,x)) = R of exp(-t d_*(o,x)),
/// fitted over the top half of R = 1..radius. Requires radius >= 6.
ThetaValue theta_empirical(const MetricProvider& p_star, const MetricProvider& p, double t,
                           int radius);

/// Grid lo, lo + step, ..., up to hi (inclusive within half a step).
std::vector<double> make_grid(double lo, double hi, double step);
/// Parses "lo:hi:step".
std::vector<double> parse_grid(std::string_view spec);

struct CurveValidation {
  bool monotone = true;
  bool convex = true;
  /// Largest Perron residual over exact points (0 for empirical models).
  double max_perron_residual = 0.0;
  bool perron_certified = true;
  /// theta(0) - h(d) and theta(h(d_*)), evaluated with the model's method.
  double theta_at_zero_error = 0.0;
  double theta_at_h_star = 0.0;
  bool endpoints_ok = true;
  /// Largest deviation from the chord through the end points.
  double linear_deviation = 0.0;
  /// Within 1e-6 of linear on an exact model: the pair is roughly similar.
  bool roughly_similar = false;
  /// Largest jump of theta' between neighbouring grid points.
  double max_derivative_jump = 0.0;
  bool c1_proxy = true;
  std::vector<std::string> notes;
};

struct ManhattanCurveModel {
  std::string star_name;
  std::string name;
  CurveMethod method = CurveMethod::exact;
  double h = 0.0;
  double h_star = 0.0;
  std::vector<double> t;
  std::vector<double> theta;
  std::vector<double> theta_prime;
  std::vector<double> residual;
  CurveValidation validation;

  /// theta at a grid point, or by linear interpolation inside the grid.
  double theta_at(double s) const;
};

ManhattanCurveModel build_curve(const MetricProvider& p_star, const MetricProvider& p,
                                const std::vector<double>& grid, CurveMethod method,
                                int empirical_radius = 12);

struct AsymptoticSlopes {
  /// theta(-t_far) / t_far, estimating Dil(d_*, d).
  double minus = 0.0;
  /// -theta(t_far) / t_far, estimating Dil(d, d_*)^-1.
  double plus = 0.0;
};

AsymptoticSlopes asymptotic_slopes(const ManhattanCurveModel& model, double t_far);

/// Header "t,theta,theta_prime,method,residual".
void write_curve_csv(const ManhattanCurveModel& model, std::ostream& out);

}  // namespace mstruct
