#include <doctest.h>

#include <cmath>
#include <fstream>
#include <map>

#include "mstruct/automaton.hpp"
#include "mstruct/error.hpp"
#include "oracles.hpp"

using namespace mstruct;
using nlohmann::json;

namespace {

const GroupContext F2(2);

Word w(const char* s) { return parse_word(F2, s); }

const std::string kShortlexFile = std::string(MSTRUCT_DATA_DIR) + "/shortlex_f2.json";

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::invalid_input;
}

}  // namespace

TEST_CASE("loading structure files") {
  const auto s = load_structure(kShortlexFile);
  CHECK(s.vertex_count() == 5);
  CHECK(s.initial() == 0);
  CHECK(s.edges().size() == 16);
  CHECK(to_json(s) == to_json(shortlex_structure(F2)));

  const auto empty = parse_structure(json::parse(R"({"vertices": 1, "initial": 0, "edges": []})"));
  CHECK(empty.edges().empty());
  CHECK(structure_growth(component_analysis(empty)) == 0);

  CHECK(kind_of([] {
          parse_structure(json::parse(
              R"({"vertices": 2, "initial": 0, "edges": [{"from": 0, "to": 1, "label": 4}]})"));
        }) == ErrorKind::invalid_input);
  CHECK(kind_of([] {
          parse_structure(json::parse(
              R"({"vertices": 2, "initial": 0, "edges": [{"from": 0, "to": 1, "label": "c"}]})"));
        }) == ErrorKind::invalid_input);
  CHECK(kind_of([] {
          parse_structure(json::parse(
              R"({"vertices": 2, "initial": 0, "edges": [{"from": 0, "to": 2, "label": "a"}]})"));
        }) == ErrorKind::invalid_input);
  CHECK(kind_of([] { parse_structure(json::parse(R"({"vertices": 2})")); }) ==
        ErrorKind::parse_error);
  CHECK(kind_of([] { load_structure("/nonexistent/structure.json"); }) == ErrorKind::parse_error);
}

TEST_CASE("shortlex structure is a bijection onto the ball") {
  const auto s = shortlex_structure(F2);
  std::map<std::size_t, std::uint64_t> by_length;
  for (const Word& x : oracle::naive_ball(F2, 6)) ++by_length[x.length()];

  const auto report = validate_bijection(s, 6);
  CHECK(report.passed);
  CHECK(report.path_counts[0] == 1);
  for (std::size_t n = 1; n <= 6; ++n) {
    CHECK(report.path_counts[n] == by_length[n]);
    CHECK(report.path_counts[n] == 4 * static_cast<std::uint64_t>(std::pow(3, n - 1)));
  }
  for (int r = 0; r <= 8; ++r) CHECK(validate_bijection(s, r).passed);

  auto doc = to_json(s);
  doc["edges"].push_back(doc["edges"][5]);
  const auto faulty = validate_bijection(parse_structure(doc), 3);
  CHECK_FALSE(faulty.passed);
  CHECK(faulty.failure.find("same element") != std::string::npos);
  CHECK_FALSE(faulty.counterexample.empty());

  // Dropping an edge loses elements.
  doc = to_json(s);
  doc["edges"].erase(doc["edges"].begin() + 6);
  const auto short_of = validate_bijection(parse_structure(doc), 3);
  CHECK_FALSE(short_of.passed);

  // A backtracking edge reads a non-geodesic word.
  doc = to_json(s);
  doc["edges"].push_back({{"from", 1}, {"to", 2}, {"label", "a-"}});
  CHECK_FALSE(validate_bijection(parse_structure(doc), 2).passed);
}

TEST_CASE("component analysis") {
  const auto comps = component_analysis(shortlex_structure(F2));
  REQUIRE(comps.size() == 1);
  CHECK(comps[0].vertices == std::vector<int>{1, 2, 3, 4});
  CHECK(comps[0].spectral_radius == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(comps[0].residual < 1e-9);
  CHECK(comps[0].maximal);

  // Cross-check against the slope of log ball counts at radius 12.
  std::vector<double> counts;
  for (int n = 0; n <= 12; ++n) counts.push_back(static_cast<double>(ball_size(F2, n)));
  const double empirical = std::log(counts[12]) - std::log(counts[11]);
  CHECK(std::abs(std::log(comps[0].spectral_radius) - empirical) < 1e-3);

  const auto isolated =
      component_analysis(parse_structure(json::parse(R"({"vertices": 2, "initial": 0, "edges": []})")));
  REQUIRE(isolated.size() == 1);
  CHECK(isolated[0].spectral_radius == 0);

  const auto loops = component_analysis(parse_structure(json::parse(R"({
    "vertices": 4, "initial": 0, "edges": [
      {"from": 0, "to": 1, "label": "a"}, {"from": 1, "to": 1, "label": "a"},
      {"from": 0, "to": 2, "label": "b"}, {"from": 2, "to": 3, "label": "b"},
      {"from": 3, "to": 2, "label": "b"}]})")));
  REQUIRE(loops.size() == 2);
  CHECK(loops[0].spectral_radius == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(loops[1].spectral_radius == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(loops[0].maximal);
  CHECK(loops[1].maximal);

  // Relabeling vertices leaves the spectral radii unchanged.
  auto doc = to_json(shortlex_structure(F2));
  const int relabel[5] = {3, 0, 4, 2, 1};
  for (auto& e : doc["edges"]) {
    e["from"] = relabel[e["from"].get<int>()];
    e["to"] = relabel[e["to"].get<int>()];
  }
  doc["initial"] = relabel[0];
  const auto permuted = component_analysis(parse_structure(doc));
  REQUIRE(permuted.size() == 1);
  CHECK(permuted[0].spectral_radius == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("axial witnesses") {
  const auto s = shortlex_structure(F2);
  const auto basis = basis_provider(F2);

  const auto direct = axial_witness(s, w("abab"), 2, 8);
  CHECK(direct.s1.is_identity());
  CHECK(direct.s2.is_identity());
  CHECK(direct.gamma == concat(w("abab"), direct.w));
  CHECK(direct.displacement <= direct.w.length());

  for (const char* x : {"a", "abA", "aabbAB", "baBA", "B"}) {
    const auto wit = axial_witness(s, w(x), 2, 8);
    CHECK(wit.gamma == concat(concat(concat(wit.s1, wit.r), wit.w), inverse(wit.s1)));
    CHECK(concat(concat(wit.s1, wit.r), wit.s2) == w(x));
    // Re-verify the certificates with the metric layer's Gromov product.
    CHECK(basis->distance(concat(inverse(w(x)), wit.gamma)) <= wit.displacement_bound);
    double axiality = 0;
    for (long m = 0; m <= 8; ++m) {
      for (long n = 0; n <= 8; ++n) {
        axiality = std::max(axiality,
                            gromov_product(*basis, power(wit.gamma, -m), power(wit.gamma, n)));
      }
    }
    CHECK(axiality == wit.axiality);
    CHECK(axiality <= wit.axiality_bound);
  }
  CHECK(kind_of([&] { axial_witness(s, Word::identity(F2), 2, 8); }) == ErrorKind::invalid_input);

  // A structure whose only loop reads powers of a cannot absorb b at radius 0.
  const auto only_a = parse_structure(json::parse(R"({
    "vertices": 2, "initial": 0, "edges": [
      {"from": 0, "to": 1, "label": "a"}, {"from": 1, "to": 1, "label": "a"}]})"));
  CHECK(kind_of([&] { axial_witness(only_a, w("b"), 0, 4); }) == ErrorKind::witness_not_found);
  CHECK(axial_witness(only_a, w("b"), 1, 4).gamma.length() > 0);
}

TEST_CASE("distance versus translation length") {
  const auto basis = basis_provider(F2);
  const std::vector<Word> identity{Word::identity(F2)};
  CHECK(length_gap(*basis, w("abab"), identity) == 0);
  CHECK(length_gap(*basis, w("abA"), identity) == 2);

  const auto ball2 = enumerate_ball(F2, 2);
  const auto report = distance_vs_length_check(*basis, ball2, 8);
  for (int r = 4; r <= 8; ++r) CHECK(report.per_radius[r] == report.per_radius[4]);
  CHECK(report.constant == report.per_radius[8]);

  // Without thickening the gap grows with the conjugation depth.
  const auto thin = distance_vs_length_check(*basis, identity, 6);
  CHECK(thin.per_radius[6] > thin.per_radius[4]);
}
