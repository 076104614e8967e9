#pragma once

// Strongly Markov structures on F_k: a finite directed graph with an initial
// vertex whose finite paths, read through their edge labels, biject onto the
// group with path length equal to word length.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mstruct/free_group.hpp"
#include "mstruct/metrics.hpp"

namespace mstruct {

struct StructureEdge {
  int from = 0;
  int to = 0;
  Letter label;
};

class StronglyMarkovStructure {
 public:
  /// Validates vertex ids and labels against the context.
  StronglyMarkovStructure(const GroupContext& ctx, int vertex_count, int initial,
                          std::vector<StructureEdge> edges);

  const GroupContext& context() const { return ctx_; }
  int vertex_count() const { return vertex_count_; }
  int initial() const { return initial_; }
  const std::vector<StructureEdge>& edges() const { return edges_; }
  /// Edge indices leaving each vertex, in file order.
  const std::vector<std::vector<std::size_t>>& out_edges() const { return out_; }

 private:
  GroupContext ctx_;
  int vertex_count_;
  int initial_;
  std::vector<StructureEdge> edges_;
  std::vector<std::vector<std::size_t>> out_;
};

/// Schema: {"rank": k (optional, default 2), "vertices": n, "initial": v,
///          "edges": [{"from": u, "to": v, "label": "a" | "a-" | ...}, ...]}
StronglyMarkovStructure parse_structure(const nlohmann::json& doc);
StronglyMarkovStructure load_structure(const std::filesystem::path& path);
nlohmann::json to_json(const StronglyMarkovStructure& s);

/// The shortlex-geodesic structure: the initial vertex plus one vertex per
/// letter recording the last letter read; inverse-adjacent letters are forbidden.
StronglyMarkovStructure shortlex_structure(const GroupContext& ctx);

struct BijectionReport {
  bool passed = true;
  int radius = 0;
  /// Number of paths of each length 0..radius.
  std::vector<std::uint64_t> path_counts;
  std::string failure;
  /// Edge indices of the offending path, if any.
  std::vector<std::size_t> counterexample;
  std::string counterexample_word;
};

BijectionReport validate_bijection(const StronglyMarkovStructure& s, int radius,
                                   std::uint64_t budget = kDefaultElementBudget);

struct ComponentReport {
  int id = 0;
  std::vector<int> vertices;
  double spectral_radius = 0.0;
  /// ||Mv - rho v||_inf / ||v||_inf for the returned Perron vector.
  double residual = 0.0;
  bool maximal = false;
};

/// Strongly connected components in order of their smallest vertex. The
/// initial vertex is left out when it lies on no cycle.
std::vector<ComponentReport> component_analysis(const StronglyMarkovStructure& s);

/// log of the largest component spectral radius, or 0 when no component has radius >= 1.
double structure_growth(const std::vector<ComponentReport>& components);

struct AxialWitness {
  Word x;
  Word gamma;
  Word s1;
  Word r;
  Word s2;
  /// Return path closing r to a loop inside the component.
  Word w;
  int component = 0;
  int component_diameter = 0;
  /// Measured d(x, gamma) and its certificate N + 2 * search_radius.
  double displacement = 0.0;
  double displacement_bound = 0.0;
  /// Measured max (gamma^-m | gamma^n) over 0 <= m, n <= M and its certificate 3 * search_radius.
  double axiality = 0.0;
  double axiality_bound = 0.0;
  int check_power = 0;
};

/// Finds x = s1 r s2 with s1, s2 in the basis ball of search_radius and r
/// readable inside a maximal component, closes r with a return path w and
/// returns gamma = s1 r w s1^-1. Throws Error(witness_not_found).
AxialWitness axial_witness(const StronglyMarkovStructure& s, const Word& x, int search_radius,
                           int check_power);

/// d(o, x) - max_{u in B} l[xu] for a single element.
double length_gap(const MetricProvider& p, const Word& x, const std::vector<Word>& B);

struct LengthGapReport {
  /// Running maximum of the gap over the basis ball of radius r, r = 0..radius.
  std::vector<double> per_radius;
  double constant = 0.0;
};

LengthGapReport distance_vs_length_check(const MetricProvider& p, const std::vector<Word>& B,
                                         int radius);

}  // namespace mstruct
