#pragma once

// Points of the space of metric structures, represented by translation-length
// functionals, and the Manhattan geodesic through two of them.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mstruct/manhattan.hpp"
#include "mstruct/metrics.hpp"

namespace mstruct {

/// Every class of cyclic length <= max_length, computed once per (rank, length).
const std::vector<CyclicWord>& classes_up_to(const GroupContext& ctx, int max_length);

struct DilationEstimate {
  /// max of l1 / l2 over enumerated classes; +inf if some class has l2 = 0 < l1.
  double value = 0.0;
  std::optional<CyclicWord> witness;
  /// Running maximum after classes of length 1..max_length.
  std::vector<double> per_length;
  /// The last three running maxima agree within 1e-12.
  bool plateau = false;
  /// Smallest length from which the running maximum no longer changes.
  int plateau_length = 0;
  /// Classes with l2 = 0 (these never enter the ratio).
  std::size_t zero_denominator = 0;

  bool infinite() const;
};

/// Dil(l1, l2) = sup l1 / l2 over classes of length <= max_length (>= 2).
/// Throws Error(degenerate_pair) when both functionals vanish on every class.
DilationEstimate dilation_estimate(const MetricProvider& l1, const MetricProvider& l2,
                                   int max_length);

enum class Provenance { interior, endpoint, recovered };

struct MetricStructurePoint {
  /// Functional scaled to growth rate 1.
  ProviderPtr ell;
  /// Factor applied to the source functional.
  double scale = 1.0;
  Provenance provenance = Provenance::endpoint;
  /// Curve parameter for interior points.
  double t = 0.0;
};

/// h(p) * l_p, with h from the exact transfer-matrix solver.
MetricStructurePoint normalized_point(ProviderPtr p, Provenance provenance = Provenance::endpoint);

/// log(Dil(l1, l2) * Dil(l2, l1)). Throws Error(boundary_pair) if a dilation is infinite.
double delta_distance(const MetricProvider& l1, const MetricProvider& l2, int max_length);
double delta_distance(const MetricStructurePoint& a, const MetricStructurePoint& b, int max_length);

/// max |log(l1/l2) - median| over 50 classes evenly spaced in the enumeration
/// of classes of length <= max_length. +inf when only one side vanishes.
double projective_defect(const MetricProvider& l1, const MetricProvider& l2, int max_length,
                         std::size_t samples = 50);

struct ManhattanDilations {
  double d_0t = 1.0;
  double d_t0 = 1.0;
  double d_hst = 1.0;
  double d_ths = 1.0;
  double delta_t0 = 0.0;
  double delta_ths = 0.0;
};

/// Closed forms for the dilations between rho_t and the two base points
/// rho_0 = [d], rho_{h(d_*)} = [d_*], given theta = theta(t).
ManhattanDilations mancomp_dilations(double h, double h_star, double dil_d_dstar,
                                     double dil_dstar_d, double theta, double t);

/// T(s, s_*, t) = t (s_* - s) / Delta(tau, tau_*) + s.
double consistency_T(double s, double s_star, double delta_tau_taustar, double t);

/// The Manhattan geodesic through [d] and [d_*] for letter-weight functionals.
/// Refuses roughly similar pairs with Error(degenerate_pair).
class ManhattanGeodesic {
 public:
  ManhattanGeodesic(ProviderPtr d, ProviderPtr d_star, int max_length = 12);

  const ProviderPtr& d() const { return d_; }
  const ProviderPtr& d_star() const { return d_star_; }
  double h() const { return h_; }
  double h_star() const { return h_star_; }
  const DilationEstimate& dil_d_dstar() const { return dil_d_dstar_; }
  const DilationEstimate& dil_dstar_d() const { return dil_dstar_d_; }
  /// Delta(rho, rho_*) = log(Dil(d, d_*) Dil(d_*, d)).
  double delta_rho_rhostar() const;

  double theta(double t) const;
  /// rho_t: l_t = t l_{d_*} + theta(t) l_d.
  MetricStructurePoint point(double t) const;
  ManhattanDilations dilations(double t) const;
  /// Closed-form Delta(rho_s, rho_t) for points on the geodesic.
  double delta(double s, double t) const;

  /// gamma(t) with Delta(rho, rho_gamma(t)) = |t| and t gamma(t) >= 0.
  double gamma(double t) const;
  MetricStructurePoint sigma(double t) const { return point(gamma(t)); }

 private:
  double signed_position(double t) const;

  ProviderPtr d_;
  ProviderPtr d_star_;
  double h_ = 0.0;
  double h_star_ = 0.0;
  DilationEstimate dil_d_dstar_;
  DilationEstimate dil_dstar_d_;
};

struct MultiplicativityReport {
  double d_rs = 1.0;
  double d_st = 1.0;
  double d_rt = 1.0;
  /// |D_rs D_st / D_rt - 1|.
  double defect = 0.0;
};

/// Enumerated dilations between geodesic points; D_{s,s} = 1 by convention.
MultiplicativityReport multiplicativity_check(const ManhattanGeodesic& geo, double r, double s,
                                              double t, int max_length = 12);

struct BoundaryPair {
  ProviderPtr ell_inf;
  ProviderPtr ell_minus_inf;
};

/// l_inf = Dil(d,d_*) l_{d_*} - l_d and l_-inf = Dil(d_*,d) l_d - l_{d_*},
/// checked nonnegative on classes of length <= validate_length.
BoundaryPair boundary_limits(ProviderPtr d, ProviderPtr d_star, double dil_d_dstar,
                             double dil_dstar_d, int validate_length = 10);

struct TransversalityReport {
  ProviderPtr d;
  ProviderPtr d_star;
  /// min (l_inf + l_-inf) / l_basis over enumerated classes.
  double positivity = 0.0;
  std::optional<CyclicWord> positivity_witness;
  DilationEstimate dil_d_dstar;
  DilationEstimate dil_dstar_d;
  /// max |2 l_{d_*} - l_d - 3 l_inf|.
  double recovery_defect = 0.0;
  /// Positivity holds and both dilations equal 2.
  bool transverse = false;
  std::vector<std::string> notes;
};

/// Builds l_d = l_inf + 2 l_-inf and l_{d_*} = 2 l_inf + l_-inf.
TransversalityReport transversality_check(ProviderPtr ell_inf, ProviderPtr ell_minus_inf,
                                          int max_length);

struct RecoveryReport {
  MetricStructurePoint point;
  ProviderPtr d_star;
  DilationEstimate dil;
  /// max |(l_{d_*} - l_d) - l_inf| over enumerated classes.
  double reproduction_defect = 0.0;
  /// l_inf vanishes on every enumerated class.
  bool degenerate = false;
};

/// l_{d_*} = l_d + l_inf with Dil(d, d_*) = 1 checked to 1e-12;
/// Throws Error(inconsistent_boundary) otherwise.
RecoveryReport recover_interior(ProviderPtr ell_d, ProviderPtr ell_inf, int max_length);

/// Header "t,gamma_t,delta_from_rho,delta_from_rhostar,method,residual".
void write_geodesic_csv(const ManhattanGeodesic& geo, const std::vector<double>& ts,
                        std::ostream& out);

}  // namespace mstruct
