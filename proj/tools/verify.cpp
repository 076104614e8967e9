// The `verify` battery. Each check prints one PASS/FAIL line; artifacts are
// written next to summary.txt and depend only on the config.

#include <cmath>
#include <fstream>
#include <iostream>

#include <fmt/format.h>

#include "cli.hpp"
#include "mstruct/automaton.hpp"
#include "mstruct/error.hpp"
#include "mstruct/manhattan.hpp"
#include "mstruct/structures.hpp"

namespace mstruct::cli {

namespace {

struct Check {
  std::string name;
  bool pass;
  std::string detail;
};

double rel(double a, double b) { return std::abs(a / b - 1); }

class Battery {
 public:
  Battery(const Config& config, std::filesystem::path dir) : config_(config), dir_(std::move(dir)) {}

  void add(std::string name, bool pass, std::string detail) {
    checks_.push_back({std::move(name), pass, std::move(detail)});
    const auto& c = checks_.back();
    std::cout << fmt::format("{} {}: {}\n", c.pass ? "PASS" : "FAIL", c.name, c.detail) << std::flush;
  }

  // Runs a check body, turning library errors into a failed line.
  template <class F>
  void guarded(const std::string& name, F&& body) {
    try {
      body();
    } catch (const Error& e) {
      add(name, false, fmt::format("error ({}): {}", to_string(e.kind()), e.what()));
    }
  }

  void artifact(const Task& task) { run_task(config_, task, dir_); }

  int finish() const {
    std::ofstream out(dir_ / "summary.txt", std::ios::binary);
    int failed = 0;
    for (const auto& c : checks_) {
      out << fmt::format("{} {}: {}\n", c.pass ? "PASS" : "FAIL", c.name, c.detail);
      failed += c.pass ? 0 : 1;
    }
    out << fmt::format("{} of {} checks passed\n", checks_.size() - failed, checks_.size());
    std::cout << fmt::format("{} of {} checks passed\n", checks_.size() - failed, checks_.size());
    return failed == 0 ? 0 : 1;
  }

  ProviderPtr get(const char* name) const { return config_.provider(name); }
  const GroupContext& ctx() const { return config_.context(); }

 private:
  const Config& config_;
  std::filesystem::path dir_;
  std::vector<Check> checks_;
};

Task make(const char* command, const char* pair, const char* out) {
  Task t;
  t.command = command;
  t.pair = pair;
  t.out = out;
  return t;
}

void core_suite(Battery& b) {
  const auto basis = b.get("basis");
  const auto d = b.get("d");
  const auto ds = b.get("dStar");
  const auto coned = b.get("coned");

  b.guarded("growth", [&] {
    const double exact = growth_rate(*basis, GrowthMethod::exact_transfer_matrix).value;
    const double emp = growth_rate(*basis, GrowthMethod::empirical_ball, 14).value;
    b.add("growth", std::abs(exact - std::log(3.0)) <= 1e-9 && std::abs(emp - exact) <= 0.02,
          fmt::format("exact {:.12f}, empirical {:.6f} at radius 14", exact, emp));
  });

  const double h = growth_rate(*d, GrowthMethod::exact_transfer_matrix).value;
  const double hs = growth_rate(*ds, GrowthMethod::exact_transfer_matrix).value;

  b.guarded("curve endpoints", [&] {
    const double e0 = std::abs(theta_exact(*ds, *d, 0).theta - h);
    const double e1 = std::abs(theta_exact(*ds, *d, hs).theta);
    const double m0 = std::abs(theta_empirical(*ds, *d, 0, 12).theta - h);
    const double m1 = std::abs(theta_empirical(*ds, *d, hs, 12).theta);
    b.add("curve endpoints", e0 <= 1e-9 && e1 <= 1e-9 && m0 <= 0.05 && m1 <= 0.05,
          fmt::format("exact errors {:.2e} {:.2e}, empirical errors {:.4f} {:.4f}", e0, e1, m0, m1));
  });

  b.guarded("curve shape", [&] {
    Task t = make("theta", "dStar,d", "theta.csv");
    t.grid = "-2:4:0.1";
    b.artifact(t);
    const auto curve = build_curve(*ds, *d, parse_grid(t.grid), CurveMethod::exact);
    double round_trip = 0;
    for (std::size_t i = 0; i < curve.t.size(); ++i) {
      round_trip = std::max(round_trip, std::abs(theta_exact(*d, *ds, curve.theta[i]).theta - curve.t[i]));
    }
    const auto& v = curve.validation;
    b.add("curve shape", v.monotone && v.convex && v.perron_certified && round_trip <= 1e-6,
          fmt::format("monotone {}, convex {}, max Perron residual {:.2e}, round trip {:.2e}", v.monotone,
                      v.convex, v.max_perron_residual, round_trip));
  });

  b.guarded("asymptotic slopes", [&] {
    Task t = make("dil", "d,dStar", "dil.csv");
    t.max_length = 10;
    b.artifact(t);
    const auto fwd = dilation_estimate(*d, *ds, 10);
    const auto bwd = dilation_estimate(*ds, *d, 10);
    const bool dils = fwd.value == 2 && bwd.value == 2 && fwd.witness == parse_class(b.ctx(), "a") &&
                      bwd.witness == parse_class(b.ctx(), "b") && fwd.plateau_length <= 2 &&
                      bwd.plateau_length <= 2;
    const double plus = -theta_exact(*ds, *d, 50).theta / 50;
    const double minus = theta_exact(*ds, *d, -50).theta / 50;
    b.add("asymptotic slopes", dils && rel(plus, 1 / fwd.value) <= 0.01 && rel(minus, bwd.value) <= 0.01,
          fmt::format("Dil {} [{}] / {} [{}], slopes {:.5f} {:.5f}", fwd.value, fwd.witness->str(), bwd.value,
                      bwd.witness->str(), plus, minus));
  });

  b.guarded("gromov product bounds", [&] {
    const auto tight = verify_qi_bounds(*d, *ds, 2, 2, 8);
    const auto loose = verify_qi_bounds(*d, *ds, 1, 1, 8);
    const double step = tight.constants[8] - tight.constants[6];
    b.add("gromov product bounds", tight.plateau && step <= 1e-6 && !loose.plateau,
          fmt::format("C(8) = {:.6f}, C(8) - C(6) = {:.2e}, plateau with (1,1): {}", tight.constants[8], step,
                      loose.plateau));
  });

  const ManhattanGeodesic geo(d, ds);

  b.guarded("closed-form dilations", [&] {
    const auto p0 = geo.point(0);
    const auto ph = geo.point(hs);
    double worst = 0;
    for (double t : {-0.5, hs / 2, 2 * hs}) {
      const auto c = geo.dilations(t);
      const auto pt = geo.point(t);
      const double e0 = dilation_estimate(*pt.ell, *p0.ell, 12).value * dilation_estimate(*p0.ell, *pt.ell, 12).value;
      const double eh = dilation_estimate(*pt.ell, *ph.ell, 12).value * dilation_estimate(*ph.ell, *pt.ell, 12).value;
      worst = std::max({worst, rel(std::exp(c.delta_t0), e0), rel(std::exp(c.delta_ths), eh)});
    }
    b.add("closed-form dilations", worst <= 0.02, fmt::format("max relative gap {:.2e}", worst));
  });

  b.guarded("multiplicativity", [&] {
    const double a = multiplicativity_check(geo, -1, 0, 1).defect;
    const double c = multiplicativity_check(geo, 0, hs / 2, hs).defect;
    b.add("multiplicativity", a <= 0.02 && c <= 0.02, fmt::format("defects {:.2e} {:.2e}", a, c));
  });

  b.guarded("arc length", [&] {
    Task t = make("geodesic", "dStar,d", "geodesic.csv");
    t.grid = "-1:1:0.25";
    b.artifact(t);
    const auto s0 = geo.sigma(0);
    double worst = 0;
    for (double s : {-0.5, -0.1, 0.1, 0.5}) {
      worst = std::max(worst, std::abs(delta_distance(s0, geo.sigma(s), 12) - std::abs(s)));
    }
    const double end = std::abs(geo.gamma(geo.delta_rho_rhostar()) - hs);
    const double full = geo.delta_rho_rhostar();
    const ManhattanGeodesic sub(geo.sigma(0.2 * full).ell, geo.sigma(0.7 * full).ell);
    double proj = 0;
    for (double s : {-0.3, 0.1, 0.4}) {
      const double T = consistency_T(0.2 * full, 0.7 * full, sub.delta_rho_rhostar(), s);
      proj = std::max(proj, projective_defect(*sub.sigma(s).ell, *geo.sigma(T).ell, 12));
    }
    b.add("arc length", worst <= 1e-6 && end <= 1e-6 && proj <= 1e-6,
          fmt::format("|Delta - |t|| {:.2e}, gamma endpoint {:.2e}, projective defect {:.2e}", worst, end, proj));
  });

  b.guarded("boundary limits", [&] {
    Task t = make("boundary", "dStar,d", "boundary.csv");
    t.max_length = 10;
    b.artifact(t);
    const auto lim = boundary_limits(d, ds, 2, 2, 12);
    std::size_t bad = 0;
    bool zero_ok = true;
    for (const CyclicWord& c : classes_up_to(b.ctx(), 12)) {
      int na = 0;
      int nb = 0;
      for (Letter l : c.letters()) (l.generator() == 0 ? na : nb) += 1;
      if (lim.ell_inf->ell(c) != 3 * nb || lim.ell_minus_inf->ell(c) != 3 * na) ++bad;
      if ((lim.ell_inf->ell(c) == 0) != (nb == 0)) zero_ok = false;
    }
    const double th = geo.theta(100);
    const auto p100 = geo.point(100);
    double worst = 0;
    for (const CyclicWord& c : classes_up_to(b.ctx(), 6)) {
      const double target = lim.ell_inf->ell(c);
      if (target > 0) worst = std::max(worst, rel(p100.ell->ell(c) / -th, target));
    }
    b.add("boundary limits", bad == 0 && zero_ok && worst <= 0.01,
          fmt::format("{} mismatches on classes <= 12, limit gap at t = 100 {:.2e}", bad, worst));
  });

  b.guarded("transversality", [&] {
    const auto r = transversality_check(b.get("ellInf"), b.get("ellMinusInf"), 12);
    const auto rec = recover_interior(d, b.get("ellInf"), 12);
    b.add("transversality",
          r.dil_d_dstar.value == 2 && r.dil_dstar_d.value == 2 && r.recovery_defect == 0 &&
              std::abs(rec.dil.value - 1) <= 1e-12 && rec.reproduction_defect == 0,
          fmt::format("Dil {} / {}, recovery defect {}, Dil(d, d + l_inf) - 1 = {:.1e}", r.dil_d_dstar.value,
                      r.dil_dstar_d.value, r.recovery_defect, rec.dil.value - 1));
  });

  b.guarded("automaton", [&] {
    Task t;
    t.command = "automaton";
    t.radius = 8;
    t.out = "automaton.json";
    b.artifact(t);
    const auto s = shortlex_structure(b.ctx());
    const auto bij = validate_bijection(s, 8);
    bool counts = bij.passed;
    for (int n = 1; n <= 8; ++n) counts = counts && bij.path_counts[n] == 4 * std::pow(3, n - 1);
    double top = 0;
    for (const auto& c : component_analysis(s)) top = std::max(top, c.spectral_radius);
    bool certs = true;
    for (const char* x : {"ab", "aab", "abAB", "aabbAB"}) {
      const auto a = axial_witness(s, parse_word(b.ctx(), x), 2, 8);
      certs = certs && a.displacement <= a.displacement_bound && a.axiality <= a.axiality_bound &&
              a.check_power == 8;
    }
    b.add("automaton", counts && std::abs(top - 3) <= 1e-9 && certs,
          fmt::format("bijection {}, top spectral radius {:.12f}, certificates {}", bij.passed, top, certs));
  });

  b.guarded("coned-off fixture", [&] {
    const auto wide = coned_off_provider(b.ctx(), basis_generators(b.ctx()), parse_word(b.ctx(), "b"),
                                         ConedOffOptions{6, 32, 2, 8}, "coned6");
    const auto a = parse_class(b.ctx(), "a");
    const auto bc = parse_class(b.ctx(), "b");
    const bool lengths = coned->ell(bc) == 0 && coned->ell(a) == 1 && wide->ell(bc) == 0 && wide->ell(a) == 1;
    const auto inf = dilation_estimate(*basis, *coned, 4);
    b.add("coned-off fixture", lengths && inf.infinite() && inf.witness == bc,
          fmt::format("l[a] = {}, l[b] = {}, Dil(basis, coned) = {} [{}]", coned->ell(a), coned->ell(bc), inf.value,
                      inf.witness ? inf.witness->str() : "-"));
  });
}

}  // namespace

int run_verify(const Config& config, const std::string& suite, const std::filesystem::path& out_dir) {
  if (suite != "core") throw Error(ErrorKind::invalid_input, fmt::format("unknown suite '{}'", suite));
  std::filesystem::create_directories(out_dir);
  Battery battery(config, out_dir);
  core_suite(battery);
  return battery.finish();
}

}  // namespace mstruct::cli
