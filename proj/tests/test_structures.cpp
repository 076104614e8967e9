#include <doctest.h>

#include <cmath>
#include <sstream>

#include "mstruct/error.hpp"
#include "mstruct/structures.hpp"
#include "oracles.hpp"

using namespace mstruct;

namespace {

const GroupContext F2(2);

Word w(const char* s) { return parse_word(F2, s); }
CyclicWord cls(const char* s) { return parse_class(F2, s); }

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::invalid_input;
}

const auto d = letter_weight_provider(F2, {2, 1}, "d");
const auto dstar = letter_weight_provider(F2, {1, 2}, "dstar");

// Brute-force sup of (2A + B)/(A + 2B) over letter counts of enumerated classes.
double count_ratio_sup(double wa, double wb, double va, double vb, int max_length) {
  double best = 0;
  for (const CyclicWord& c : enumerate_conj_classes(F2, max_length)) {
    const auto n = oracle::generator_counts(c.letters(), 2);
    best = std::max(best, (wa * n[0] + wb * n[1]) / (va * n[0] + vb * n[1]));
  }
  return best;
}

}  // namespace

TEST_CASE("dilation estimates") {
  const auto half = dilation_estimate(*d, *scaled(d, 2), 2);
  CHECK(half.value == 0.5);
  CHECK(half.witness == cls("a"));
  CHECK(half.plateau);
  CHECK(half.plateau_length == 1);

  const auto forward = dilation_estimate(*d, *dstar, 10);
  CHECK(forward.value == 2);
  CHECK(forward.value == count_ratio_sup(2, 1, 1, 2, 10));
  CHECK(forward.witness == cls("a"));
  CHECK(forward.plateau);
  for (std::size_t i = 1; i < forward.per_length.size(); ++i) {
    CHECK(forward.per_length[i] >= forward.per_length[i - 1]);
  }
  // The witness is [a] at every enumeration length.
  for (int n = 2; n <= 8; ++n) CHECK(dilation_estimate(*d, *dstar, n).witness == cls("a"));

  const auto backward = dilation_estimate(*dstar, *d, 10);
  CHECK(backward.value == 2);
  CHECK(backward.witness == cls("b"));

  const auto cone = coned_off_provider(F2, basis_generators(F2), w("b"));
  const auto inf = dilation_estimate(*basis_provider(F2), *cone, 4);
  CHECK(inf.infinite());
  CHECK(inf.witness == cls("b"));
  CHECK(inf.zero_denominator > 0);

  const auto zero = linear_combination(1, -1, d, d);
  CHECK(kind_of([&] { dilation_estimate(*zero, *zero, 4); }) == ErrorKind::degenerate_pair);
  CHECK(kind_of([&] { dilation_estimate(*d, *dstar, 1); }) == ErrorKind::invalid_input);
}

TEST_CASE("delta distance") {
  const auto rho = normalized_point(d);
  const auto rho2 = normalized_point(scaled(d, 2));
  CHECK(std::abs(delta_distance(rho, rho2, 8)) < 1e-12);

  const auto rho_star = normalized_point(dstar);
  CHECK(delta_distance(rho, rho_star, 10) == doctest::Approx(std::log(4.0)).epsilon(1e-14));
  CHECK(delta_distance(rho, rho_star, 10) == delta_distance(rho_star, rho, 10));

  const auto cone = coned_off_provider(F2, basis_generators(F2), w("b"));
  CHECK(kind_of([&] { delta_distance(*basis_provider(F2), *cone, 3); }) == ErrorKind::boundary_pair);
}

TEST_CASE("closed-form dilations") {
  const double h = growth_rate(*d, GrowthMethod::exact_transfer_matrix).value;
  const double hs = growth_rate(*dstar, GrowthMethod::exact_transfer_matrix).value;
  const double theta_hs = theta_exact(*dstar, *d, hs).theta;
  const auto at_hs = mancomp_dilations(h, hs, 2, 2, theta_hs, hs);
  CHECK(at_hs.d_0t == doctest::Approx(h * 2 / hs).epsilon(1e-8));
  CHECK(at_hs.delta_ths == 0);

  const auto near_zero = mancomp_dilations(h, hs, 2, 2, theta_exact(*dstar, *d, 1e-7).theta, 1e-7);
  CHECK(near_zero.delta_t0 < 1e-6);
  const auto at_zero = mancomp_dilations(h, hs, 2, 2, h, 0);
  CHECK(at_zero.d_0t == 1);
  CHECK(at_zero.delta_t0 == 0);
}

TEST_CASE("geodesic points against enumeration") {
  const ManhattanGeodesic geo(d, dstar);
  CHECK(geo.delta_rho_rhostar() == doctest::Approx(std::log(4.0)));

  const auto p0 = geo.point(0);
  for (const CyclicWord& c : enumerate_conj_classes(F2, 6)) {
    CHECK(p0.ell->ell(c) == doctest::Approx(geo.h() * d->ell(c)).epsilon(1e-12));
    CHECK(geo.point(geo.h_star()).ell->ell(c) ==
          doctest::Approx(geo.h_star() * dstar->ell(c)).epsilon(1e-8));
  }
  // Nonnegativity at t = -1 on the reversed pair.
  const ManhattanGeodesic reversed(dstar, d);
  const auto pm1 = reversed.point(-1);
  for (const CyclicWord& c : classes_up_to(F2, 10)) CHECK(pm1.ell->ell(c) >= 0);

  for (double t : {-0.5, geo.h_star() / 2, 2 * geo.h_star()}) {
    const auto closed = geo.dilations(t);
    const auto pt = geo.point(t);
    const double e0 = dilation_estimate(*pt.ell, *p0.ell, 12).value *
                      dilation_estimate(*p0.ell, *pt.ell, 12).value;
    CHECK(std::abs(std::exp(closed.delta_t0) / e0 - 1) < 1e-9);
    const auto phs = geo.point(geo.h_star());
    const double eh = dilation_estimate(*pt.ell, *phs.ell, 12).value *
                      dilation_estimate(*phs.ell, *pt.ell, 12).value;
    CHECK(std::abs(std::exp(closed.delta_ths) / eh - 1) < 1e-8);
  }

  CHECK(kind_of([] { ManhattanGeodesic(d, scaled(d, 3)); }) == ErrorKind::degenerate_pair);
}

TEST_CASE("geodesic additivity and unboundedness") {
  const ManhattanGeodesic geo(d, dstar);
  const double full = geo.delta_rho_rhostar();
  for (double s : {0.1, 0.3, 0.6}) {
    const double t = s * geo.h_star();
    CHECK(geo.dilations(t).delta_t0 + geo.dilations(t).delta_ths == doctest::Approx(full).epsilon(1e-9));
  }
  for (double t : {1.5 * geo.h_star(), 3.0 * geo.h_star()}) {
    CHECK(geo.dilations(t).delta_t0 == doctest::Approx(full + geo.dilations(t).delta_ths).epsilon(1e-9));
  }
  CHECK(geo.delta(-1, 1) == doctest::Approx(geo.delta(-1, 0) + geo.delta(0, 1)).epsilon(1e-12));
  const double a = geo.dilations(10).delta_ths;
  const double b = geo.dilations(20).delta_ths;
  const double c = geo.dilations(40).delta_ths;
  CHECK(a < b);
  CHECK(b < c);
}

TEST_CASE("multiplicativity") {
  const ManhattanGeodesic geo(d, dstar);
  CHECK(multiplicativity_check(geo, 0, geo.h_star() / 2, geo.h_star()).defect <= 0.02);
  CHECK(multiplicativity_check(geo, -1, 0, 1).defect <= 0.02);
  CHECK(multiplicativity_check(geo, 0, 0, 1).defect == 0);
}

TEST_CASE("arc-length parametrization") {
  const ManhattanGeodesic geo(d, dstar);
  CHECK(geo.gamma(0) == 0);
  const auto s0 = geo.sigma(0);
  for (double t : {-0.5, -0.1, 0.1, 0.5}) {
    const double g = geo.gamma(t);
    CHECK(g * t > 0);
    CHECK(std::abs(delta_distance(s0, geo.sigma(t), 12) - std::abs(t)) < 1e-6);
  }
  CHECK(std::abs(geo.gamma(geo.delta_rho_rhostar()) - geo.h_star()) < 1e-6);

  std::ostringstream csv;
  write_geodesic_csv(geo, {-0.5, 0, 0.5}, csv);
  CHECK(csv.str().rfind("t,gamma_t,delta_from_rho,delta_from_rhostar,method,residual\n", 0) == 0);
}

TEST_CASE("consistency reparametrization") {
  CHECK(consistency_T(0, 1.3, 1.3, 0.7) == doctest::Approx(0.7));
  CHECK(consistency_T(0.4, 1.3, 2.0, 0) == 0.4);
  CHECK(kind_of([] { consistency_T(1, 1, 1, 0.5); }) == ErrorKind::invalid_input);

  const ManhattanGeodesic geo(d, dstar);
  const double full = geo.delta_rho_rhostar();
  const double s = 0.2 * full;
  const double s_star = 0.7 * full;
  const ManhattanGeodesic sub(geo.sigma(s).ell, geo.sigma(s_star).ell);
  for (double t : {-0.3, 0.1, 0.4}) {
    const double T = consistency_T(s, s_star, sub.delta_rho_rhostar(), t);
    CHECK(projective_defect(*sub.sigma(t).ell, *geo.sigma(T).ell, 10) <= 1e-6);
  }
}

TEST_CASE("boundary limits") {
  const auto limits = boundary_limits(d, dstar, 2, 2);
  for (const CyclicWord& c : classes_up_to(F2, 10)) {
    const auto n = oracle::generator_counts(c.letters(), 2);
    CHECK(limits.ell_inf->ell(c) == 3 * n[1]);
    CHECK(limits.ell_minus_inf->ell(c) == 3 * n[0]);
  }
  CHECK(limits.ell_inf->ell(cls("a")) == 0);
  CHECK(kind_of([] { boundary_limits(d, dstar, 1.5, 2); }) == ErrorKind::negative_length);

  const ManhattanGeodesic geo(d, dstar);
  const double theta100 = geo.theta(100);
  const auto p100 = geo.point(100);
  const auto& classes = classes_up_to(F2, 8);
  for (std::size_t i = 0; i < 20; ++i) {
    const CyclicWord& c = classes[(i * 37 + 5) % classes.size()];
    const double limit = p100.ell->ell(c) / -theta100;
    CHECK(std::abs(limit - limits.ell_inf->ell(c)) <= 0.01 * std::max(1.0, limits.ell_inf->ell(c)));
  }
}

TEST_CASE("out-invariance under the basis swap") {
  const auto phi = BasisAutomorphism::swap(F2, 0, 1);
  const auto dp = precompose(d, phi);
  const auto dsp = precompose(dstar, phi);
  const auto fwd = dilation_estimate(*dp, *dsp, 8);
  const auto bwd = dilation_estimate(*dsp, *dp, 8);
  CHECK(fwd.value == dilation_estimate(*dstar, *d, 8).value);
  CHECK(fwd.witness == cls("b"));
  CHECK(bwd.witness == cls("a"));
  const auto swapped = boundary_limits(dp, dsp, 2, 2);
  const auto plain = boundary_limits(d, dstar, 2, 2);
  for (const CyclicWord& c : classes_up_to(F2, 8)) {
    CHECK(swapped.ell_inf->ell(c) == plain.ell_minus_inf->ell(c));
    CHECK(swapped.ell_minus_inf->ell(c) == plain.ell_inf->ell(c));
  }
}

TEST_CASE("scaling invariance") {
  const ManhattanGeodesic geo(d, dstar);
  const ManhattanGeodesic big(scaled(d, 3), scaled(dstar, 3));
  CHECK(big.delta_rho_rhostar() == doctest::Approx(geo.delta_rho_rhostar()).epsilon(1e-12));
  CHECK(big.dil_d_dstar().value == geo.dil_d_dstar().value);
  for (double t : {-0.4, 0.3, 1.0}) {
    const auto a = geo.sigma(t);
    const auto b = big.sigma(t);
    for (const CyclicWord& c : classes_up_to(F2, 4)) {
      CHECK(std::abs(a.ell->ell(c) - b.ell->ell(c)) <= 1e-12 * std::max(1.0, a.ell->ell(c)));
    }
  }
  const auto r1 = normalized_point(d);
  const auto r3 = normalized_point(scaled(d, 3));
  for (const CyclicWord& c : classes_up_to(F2, 4)) {
    CHECK(std::abs(r1.ell->ell(c) - r3.ell->ell(c)) <= 1e-12 * r1.ell->ell(c));
  }
}

TEST_CASE("transversality") {
  const auto inf = scaled(letter_count_provider(F2, 1), 3);
  const auto minus = scaled(letter_count_provider(F2, 0), 3);
  const auto report = transversality_check(inf, minus, 12);
  CHECK(report.positivity == 3);
  CHECK(report.dil_d_dstar.value == 2);
  CHECK(report.dil_dstar_d.value == 2);
  CHECK(report.dil_d_dstar.witness == cls("a"));
  CHECK(report.dil_dstar_d.witness == cls("b"));
  CHECK(report.recovery_defect == 0);
  CHECK(report.transverse);

  const auto same = transversality_check(letter_count_provider(F2, 1), letter_count_provider(F2, 1), 8);
  CHECK(same.positivity == 0);
  CHECK(same.positivity_witness == cls("a"));
  CHECK_FALSE(same.transverse);

  const auto mixed = transversality_check(basis_provider(F2), letter_count_provider(F2, 0), 8);
  CHECK_FALSE(mixed.transverse);
  CHECK(mixed.dil_d_dstar.value != 2);
  CHECK_FALSE(mixed.notes.empty());
}

TEST_CASE("recovering interior structures") {
  const auto basis = basis_provider(F2);
  const auto b_count = letter_count_provider(F2, 1);
  const auto rec = recover_interior(basis, b_count, 10);
  CHECK(std::abs(rec.dil.value - 1) <= 1e-12);
  CHECK(rec.dil.witness == cls("a"));
  CHECK(rec.reproduction_defect == 0);
  CHECK_FALSE(rec.degenerate);
  CHECK(rec.d_star->ell(cls("ab")) == 3);

  const auto zero = linear_combination(1, -1, b_count, b_count);
  CHECK(recover_interior(basis, zero, 6).degenerate);

  // l_inf = 3 (a-count) - 2 (basis) is negative somewhere, so Dil exceeds 1.
  const auto overshoot = scaled(basis, 0.5);
  CHECK(kind_of([&] { recover_interior(basis, overshoot, 6); }) == ErrorKind::inconsistent_boundary);
}
