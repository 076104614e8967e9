#include "mstruct/structures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>

#include <fmt/format.h>

#include "mstruct/error.hpp"

namespace mstruct {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double exact_growth(const MetricProvider& p) {
  return growth_rate(p, GrowthMethod::exact_transfer_matrix).value;
}

}  // namespace

const std::vector<CyclicWord>& classes_up_to(const GroupContext& ctx, int max_length) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::unique_ptr<std::vector<CyclicWord>>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{ctx.rank(), max_length}];
  if (!slot) {
    slot = std::make_unique<std::vector<CyclicWord>>(enumerate_conj_classes(ctx, max_length));
  }
  return *slot;
}

// -- Dilations -------------------------------------------------------------------

bool DilationEstimate::infinite() const { return std::isinf(value); }

DilationEstimate dilation_estimate(const MetricProvider& l1, const MetricProvider& l2,
                                   int max_length) {
  if (max_length < 2) throw Error(ErrorKind::invalid_input, "dilation needs max_length >= 2");
  if (!(l1.context() == l2.context())) {
    throw Error(ErrorKind::context_mismatch, "functionals live on different groups");
  }
  DilationEstimate out;
  bool any_nonzero = false;
  double best = -kInf;
  std::size_t current_length = 1;
  auto close_lengths_up_to = [&](std::size_t len) {
    while (out.per_length.size() < len) out.per_length.push_back(best);
  };
  for (const CyclicWord& c : classes_up_to(l1.context(), max_length)) {
    if (c.length() != current_length) {
      close_lengths_up_to(c.length() - 1);
      current_length = c.length();
    }
    const double a = l1.ell(c);
    const double b = l2.ell(c);
    if (a != 0.0 || b != 0.0) any_nonzero = true;
    if (b == 0.0) {
      ++out.zero_denominator;
      if (a > 0.0 && !std::isinf(best)) {
        best = kInf;
        out.witness = c;
      }
      continue;
    }
    const double ratio = a / b;
    if (ratio > best) {
      best = ratio;
      out.witness = c;
    }
  }
  if (!any_nonzero) {
    throw Error(ErrorKind::degenerate_pair,
                fmt::format("'{}' and '{}' vanish on every class of length <= {}", l1.name(),
                            l2.name(), max_length));
  }
  close_lengths_up_to(static_cast<std::size_t>(max_length));
  out.value = std::max(best, 0.0);
  for (double& v : out.per_length) v = std::max(v, 0.0);

  const std::size_t n = out.per_length.size();
  const std::size_t k = std::min<std::size_t>(3, n);
  out.plateau = true;
  for (std::size_t i = n - k + 1; i < n; ++i) {
    const double x = out.per_length[i];
    const double y = out.per_length[i - 1];
    if (!(x == y || std::abs(x - y) <= 1e-12)) out.plateau = false;
  }
  out.plateau_length = static_cast<int>(n);
  while (out.plateau_length > 1 &&
         out.per_length[static_cast<std::size_t>(out.plateau_length) - 2] == out.per_length.back()) {
    --out.plateau_length;
  }
  return out;
}

MetricStructurePoint normalized_point(ProviderPtr p, Provenance provenance) {
  const double h = exact_growth(*p);
  MetricStructurePoint out;
  out.scale = h;
  out.ell = scaled(p, h, fmt::format("{}*{}", h, p->name()));
  out.provenance = provenance;
  return out;
}

double delta_distance(const MetricProvider& l1, const MetricProvider& l2, int max_length) {
  const DilationEstimate a = dilation_estimate(l1, l2, max_length);
  const DilationEstimate b = dilation_estimate(l2, l1, max_length);
  if (a.infinite() || b.infinite()) {
    const auto& witness = a.infinite() ? a.witness : b.witness;
    throw Error(ErrorKind::boundary_pair,
                fmt::format("infinite dilation between '{}' and '{}' at [{}]", l1.name(), l2.name(),
                            witness ? witness->str() : std::string("?")));
  }
  return std::log(a.value * b.value);
}

double delta_distance(const MetricStructurePoint& a, const MetricStructurePoint& b, int max_length) {
  return delta_distance(*a.ell, *b.ell, max_length);
}

double projective_defect(const MetricProvider& l1, const MetricProvider& l2, int max_length,
                         std::size_t samples) {
  const auto& classes = classes_up_to(l1.context(), max_length);
  if (classes.empty() || samples == 0) return 0.0;
  std::vector<double> logs;
  const std::size_t n = std::min(samples, classes.size());
  for (std::size_t i = 0; i < n; ++i) {
    const CyclicWord& c = classes[i * classes.size() / n];
    const double a = l1.ell(c);
    const double b = l2.ell(c);
    if (a == 0.0 && b == 0.0) continue;
    if (a == 0.0 || b == 0.0) return kInf;
    logs.push_back(std::log(a / b));
  }
  if (logs.empty()) return 0.0;
  const double m = median(logs);
  double worst = 0.0;
  for (double x : logs) worst = std::max(worst, std::abs(x - m));
  return worst;
}

// -- Closed forms ----------------------------------------------------------------

ManhattanDilations mancomp_dilations(double h, double h_star, double dil_d_dstar,
                                     double dil_dstar_d, double theta, double t) {
  ManhattanDilations out;
  if (t < 0) {
    out.d_0t = h / (t * dil_dstar_d + theta);
    out.d_t0 = (t / dil_d_dstar + theta) / h;
  } else if (t > 0) {
    out.d_0t = h / (t / dil_d_dstar + theta);
    out.d_t0 = (t * dil_dstar_d + theta) / h;
  }
  // The sign of theta(t), hence the branch, changes at t = h(d_*).
  if (t < h_star) {
    out.d_hst = h_star / (theta / dil_dstar_d + t);
    out.d_ths = (theta * dil_d_dstar + t) / h_star;
  } else if (t > h_star) {
    out.d_hst = h_star / (theta * dil_d_dstar + t);
    out.d_ths = (theta / dil_dstar_d + t) / h_star;
  }
  out.delta_t0 = t == 0 ? 0.0 : std::log(out.d_0t * out.d_t0);
  out.delta_ths = t == h_star ? 0.0 : std::log(out.d_hst * out.d_ths);
  return out;
}

double consistency_T(double s, double s_star, double delta_tau_taustar, double t) {
  if (s == s_star) throw Error(ErrorKind::invalid_input, "consistency map needs s != s_*");
  if (!(delta_tau_taustar > 0)) {
    throw Error(ErrorKind::invalid_input, "consistency map needs Delta(tau, tau_*) > 0");
  }
  return t * (s_star - s) / delta_tau_taustar + s;
}

// -- Manhattan geodesic ----------------------------------------------------------

ManhattanGeodesic::ManhattanGeodesic(ProviderPtr d, ProviderPtr d_star, int max_length)
    : d_(std::move(d)), d_star_(std::move(d_star)) {
  h_ = exact_growth(*d_);
  h_star_ = exact_growth(*d_star_);
  dil_d_dstar_ = dilation_estimate(*d_, *d_star_, max_length);
  dil_dstar_d_ = dilation_estimate(*d_star_, *d_, max_length);
  if (dil_d_dstar_.infinite() || dil_dstar_d_.infinite()) {
    throw Error(ErrorKind::boundary_pair,
                fmt::format("'{}' and '{}' are not quasi-isometric", d_->name(), d_star_->name()));
  }
  const double lo = std::min(-1.0, -h_star_);
  const auto curve = build_curve(*d_star_, *d_, make_grid(lo, 2 * h_star_ + 1, (2 * h_star_ + 1 - lo) / 8),
                                 CurveMethod::exact);
  if (curve.validation.roughly_similar || delta_rho_rhostar() <= 1e-9) {
    throw Error(ErrorKind::degenerate_pair,
                fmt::format("'{}' and '{}' are roughly similar; no Manhattan geodesic", d_->name(),
                            d_star_->name()));
  }
}

double ManhattanGeodesic::delta_rho_rhostar() const {
  return std::log(dil_d_dstar_.value * dil_dstar_d_.value);
}

double ManhattanGeodesic::theta(double t) const { return theta_exact(*d_star_, *d_, t).theta; }

MetricStructurePoint ManhattanGeodesic::point(double t) const {
  const double th = theta(t);
  MetricStructurePoint out;
  out.ell = linear_combination(t, th, d_star_, d_, fmt::format("rho_{}", t));
  out.scale = 1.0;
  out.provenance = Provenance::interior;
  out.t = t;
  return out;
}

ManhattanDilations ManhattanGeodesic::dilations(double t) const {
  return mancomp_dilations(h_, h_star_, dil_d_dstar_.value, dil_dstar_d_.value, theta(t), t);
}

double ManhattanGeodesic::signed_position(double t) const {
  if (t == 0) return 0.0;
  const double dist = dilations(t).delta_t0;
  return t > 0 ? dist : -dist;
}

double ManhattanGeodesic::delta(double s, double t) const {
  return std::abs(signed_position(t) - signed_position(s));
}

double ManhattanGeodesic::gamma(double t) const {
  if (t == 0) return 0.0;
  const double target = std::abs(t);
  const double sign = t > 0 ? 1.0 : -1.0;
  double lo = 0.0;
  double hi = std::max(1.0, h_star_);
  while (dilations(sign * hi).delta_t0 < target) {
    lo = hi;
    hi *= 2;
    if (hi > 1e6) {
      throw Error(ErrorKind::out_of_range,
                  fmt::format("arc length {} is beyond the reach of the curve", t));
    }
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (dilations(sign * mid).delta_t0 < target ? lo : hi) = mid;
  }
  return sign * 0.5 * (lo + hi);
}

MultiplicativityReport multiplicativity_check(const ManhattanGeodesic& geo, double r, double s,
                                              double t, int max_length) {
  if (r > s || s > t) throw Error(ErrorKind::invalid_input, "multiplicativity needs r <= s <= t");
  auto dil = [&](double x, double y) {
    if (x == y) return 1.0;
    return dilation_estimate(*geo.point(x).ell, *geo.point(y).ell, max_length).value;
  };
  MultiplicativityReport out;
  out.d_rs = dil(r, s);
  out.d_st = dil(s, t);
  out.d_rt = dil(r, t);
  out.defect = std::abs(out.d_rs * out.d_st / out.d_rt - 1.0);
  return out;
}

// -- Boundary ----------------------------------------------------------------------

BoundaryPair boundary_limits(ProviderPtr d, ProviderPtr d_star, double dil_d_dstar,
                             double dil_dstar_d, int validate_length) {
  if (!std::isfinite(dil_d_dstar) || !std::isfinite(dil_dstar_d)) {
    throw Error(ErrorKind::boundary_pair, "boundary limits need finite dilations");
  }
  BoundaryPair out;
  out.ell_inf = boundary_difference(d, d_star, dil_d_dstar, "ell_inf");
  out.ell_minus_inf = boundary_difference(d_star, d, dil_dstar_d, "ell_minus_inf");
  for (const CyclicWord& c : classes_up_to(d->context(), validate_length)) {
    out.ell_inf->ell(c);
    out.ell_minus_inf->ell(c);
  }
  return out;
}

TransversalityReport transversality_check(ProviderPtr ell_inf, ProviderPtr ell_minus_inf,
                                          int max_length) {
  const GroupContext& ctx = ell_inf->context();
  if (vanishes_identically(*ell_inf, max_length) || vanishes_identically(*ell_minus_inf, max_length)) {
    throw Error(ErrorKind::degenerate_pair, "boundary functionals must not vanish identically");
  }
  TransversalityReport out;
  using Terms = std::vector<LinearCombinationProvider::Term>;
  out.d = std::make_shared<LinearCombinationProvider>("d", Terms{{1.0, ell_inf}, {2.0, ell_minus_inf}});
  out.d_star =
      std::make_shared<LinearCombinationProvider>("dstar", Terms{{2.0, ell_inf}, {1.0, ell_minus_inf}});

  const auto basis = basis_provider(ctx);
  out.positivity = kInf;
  for (const CyclicWord& c : classes_up_to(ctx, max_length)) {
    const double li = ell_inf->ell(c);
    const double lm = ell_minus_inf->ell(c);
    const double ratio = (li + lm) / basis->ell(c);
    if (ratio < out.positivity) {
      out.positivity = ratio;
      out.positivity_witness = c;
    }
    const double defect = std::abs(2 * out.d_star->ell(c) - out.d->ell(c) - 3 * li);
    out.recovery_defect = std::max(out.recovery_defect, defect);
  }
  if (out.positivity > 0) {
    out.dil_d_dstar = dilation_estimate(*out.d, *out.d_star, max_length);
    out.dil_dstar_d = dilation_estimate(*out.d_star, *out.d, max_length);
  } else {
    out.notes.push_back(fmt::format("l_inf + l_-inf vanishes on [{}]: not transverse",
                                    out.positivity_witness->str()));
    out.dil_d_dstar.value = out.dil_dstar_d.value = kInf;
  }
  const bool two_two = out.dil_d_dstar.value == 2.0 && out.dil_dstar_d.value == 2.0;
  out.transverse = out.positivity > 0 && two_two;
  if (out.positivity > 0 && !two_two) {
    out.notes.push_back(fmt::format("dilations {} and {} differ from 2: not a boundary pair",
                                    out.dil_d_dstar.value, out.dil_dstar_d.value));
  }
  return out;
}

RecoveryReport recover_interior(ProviderPtr ell_d, ProviderPtr ell_inf, int max_length) {
  const GroupContext& ctx = ell_d->context();
  for (const CyclicWord& c : classes_up_to(ctx, max_length)) {
    if (!(ell_d->ell(c) > 0)) {
      throw Error(ErrorKind::invalid_input,
                  fmt::format("'{}' vanishes on [{}]; not an interior structure", ell_d->name(), c.str()));
    }
  }
  RecoveryReport out;
  out.d_star = linear_combination(1.0, 1.0, ell_d, ell_inf, "recovered");
  out.dil = dilation_estimate(*ell_d, *out.d_star, max_length);
  if (std::abs(out.dil.value - 1.0) > 1e-12) {
    throw Error(ErrorKind::inconsistent_boundary,
                fmt::format("Dil(d, d + l_inf) = {} instead of 1", out.dil.value));
  }
  const auto back = boundary_difference(ell_d, out.d_star, 1.0);
  for (const CyclicWord& c : classes_up_to(ctx, max_length)) {
    out.reproduction_defect =
        std::max(out.reproduction_defect, std::abs(back->ell(c) - ell_inf->ell(c)));
  }
  out.degenerate = vanishes_identically(*ell_inf, max_length);
  out.point.ell = out.d_star;
  out.point.provenance = Provenance::recovered;
  if (auto form = out.d_star->letter_weight_form();
      form && std::all_of(form->begin(), form->end(), [](double w) { return w > 0; })) {
    out.point = normalized_point(out.d_star, Provenance::recovered);
  }
  return out;
}

void write_geodesic_csv(const ManhattanGeodesic& geo, const std::vector<double>& ts,
                        std::ostream& out) {
  out << "t,gamma_t,delta_from_rho,delta_from_rhostar,method,residual\n";
  for (double t : ts) {
    const double g = geo.gamma(t);
    const ManhattanDilations dil = geo.dilations(g);
    // Residual of the arc-length inversion: | Delta(rho, rho_gamma) - |t| |.
    out << fmt::format("{:.10g},{:.15g},{:.15g},{:.15g},closed_form,{:.6e}\n", t, g, dil.delta_t0,
                       dil.delta_ths, std::abs(dil.delta_t0 - std::abs(t)));
  }
}

}  // namespace mstruct
