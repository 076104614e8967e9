#pragma once

// Left-invariant pseudo metrics on F_k, represented operationally.
//
// A MetricProvider reports d(o, x) (when it has distance) and the stable
// translation length l[x] of conjugacy classes. Providers are immutable and
// shared through ProviderPtr; the ones that search the Cayley graph keep
// internal caches guarded by a mutex.

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mstruct/free_group.hpp"

namespace mstruct {

struct Capabilities {
  bool has_distance = false;
  bool exact_translation_length = false;
};

/// One evaluation of a translation-length functional.
struct LengthValue {
  double value = 0.0;
  /// Zero for exact values; Fekete residual otherwise.
  double residual = 0.0;
  bool exact = true;
};

/// Receives the letters of a reduced word and d(o, x).
using BallVisitor = std::function<void(std::span<const Letter>, double)>;

class MetricProvider {
 public:
  MetricProvider(std::string name, const GroupContext& ctx) : name_(std::move(name)), ctx_(ctx) {}
  virtual ~MetricProvider() = default;
  MetricProvider(const MetricProvider&) = delete;
  MetricProvider& operator=(const MetricProvider&) = delete;

  const std::string& name() const { return name_; }
  const GroupContext& context() const { return ctx_; }
  virtual Capabilities capabilities() const = 0;

  /// d(o, x). Throws Error(capability_missing) for length-only providers.
  double distance(const Word& x) const;
  /// d(o, x) for letters already known to be reduced and in context.
  double distance_reduced(std::span<const Letter> reduced) const;

  LengthValue length(const CyclicWord& c) const;
  double ell(const CyclicWord& c) const { return length(c).value; }

  /// Weights w_g with l[x] = sum over the cyclic word of w_{generator}, when
  /// the functional has that form.
  virtual std::optional<std::vector<double>> letter_weight_form() const { return std::nullopt; }

  /// Some c > 0 with d(o, x) >= c |x|_basis, or 0 if none is known.
  virtual double basis_lower_ratio() const { return 0.0; }

  /// Visits every x with d(o, x) <= radius (order unspecified but deterministic).
  /// Throws Error(budget_exceeded) when more than `budget` elements would be visited.
  virtual void for_each_in_ball(double radius, const BallVisitor& visit,
                                std::uint64_t budget = kDefaultElementBudget) const;

 protected:
  virtual double distance_of(std::span<const Letter> reduced) const;
  virtual LengthValue length_of(const CyclicWord& c) const = 0;

 private:
  std::string name_;
  GroupContext ctx_;
};

using ProviderPtr = std::shared_ptr<const MetricProvider>;

/// d(o, x) = sum of generator weights over the reduced word of x.
class LetterWeightProvider final : public MetricProvider {
 public:
  LetterWeightProvider(std::string name, const GroupContext& ctx, std::vector<double> weights);

  Capabilities capabilities() const override { return {true, true}; }
  std::optional<std::vector<double>> letter_weight_form() const override { return weights_; }
  double basis_lower_ratio() const override;
  void for_each_in_ball(double radius, const BallVisitor& visit,
                        std::uint64_t budget) const override;
  const std::vector<double>& weights() const { return weights_; }

 protected:
  double distance_of(std::span<const Letter> reduced) const override;
  LengthValue length_of(const CyclicWord& c) const override;

 private:
  std::vector<double> weights_;
};

/// d(o, x) = number of letters a_g^{+-1} in the reduced word of x.
class LetterCountProvider final : public MetricProvider {
 public:
  LetterCountProvider(std::string name, const GroupContext& ctx, int generator);

  Capabilities capabilities() const override { return {true, true}; }
  std::optional<std::vector<double>> letter_weight_form() const override;
  int generator() const { return generator_; }

 protected:
  double distance_of(std::span<const Letter> reduced) const override;
  LengthValue length_of(const CyclicWord& c) const override;

 private:
  int generator_;
};

struct WordMetricOptions {
  /// Fekete horizon N used for l.
  int fekete_n = 8;
  /// Generation check: BFS radius and element caps.
  int generation_radius = 16;
  std::uint64_t generation_budget = 100000;
};

/// Word metric d_S(x, y) = |x^-1 y|_S for a finite symmetric generating set S.
class WordMetricProvider final : public MetricProvider {
 public:
  WordMetricProvider(std::string name, const GroupContext& ctx, std::vector<Word> generators,
                     WordMetricOptions options = {});

  Capabilities capabilities() const override { return {true, false}; }
  double basis_lower_ratio() const override;
  void for_each_in_ball(double radius, const BallVisitor& visit,
                        std::uint64_t budget) const override;
  const std::vector<Word>& generators() const { return generators_; }

 protected:
  double distance_of(std::span<const Letter> reduced) const override;
  LengthValue length_of(const CyclicWord& c) const override;

 private:
  // Grows the cached S-ball to `radius` (caller holds the lock).
  void grow_locked(int radius, std::uint64_t budget) const;

  std::vector<Word> generators_;
  WordMetricOptions options_;
  std::size_t longest_ = 0;
  mutable std::mutex mutex_;
  // dist_ holds exactly the S-ball grown so far; far_ memoizes other queries.
  mutable std::unordered_map<Word, int, WordHash> dist_;
  mutable std::unordered_map<Word, int, WordHash> far_;
  mutable std::vector<std::vector<Word>> layers_;
};

struct ConedOffOptions {
  /// Fattening: the search stays within basis distance K of the geodesic [o, x].
  int fattening = 4;
  /// Coset jumps g -> g w^m use 1 <= |m| <= jump_cap.
  int jump_cap = 32;
  /// Fattening increment used by the stability re-check.
  int stability_step = 2;
  int fekete_n = 8;
};

struct ConedDistance {
  double value = 0.0;
  /// True when enlarging the fattening by stability_step leaves the value unchanged.
  bool stable = true;
};

/// Coned-off Cayley graph of S relative to the cyclic subgroup H = <w>: an
/// S-step costs 1, and a jump g -> g w^m through the cone vertex of gH costs 1.
/// Distances are upper bounds computed on a fattened neighbourhood.
class ConedOffProvider final : public MetricProvider {
 public:
  ConedOffProvider(std::string name, const GroupContext& ctx, std::vector<Word> generators,
                   Word subgroup_generator, ConedOffOptions options = {});

  Capabilities capabilities() const override { return {true, false}; }
  /// Distance at the configured fattening together with the stability flag.
  ConedDistance distance_report(const Word& x) const;
  /// Distance computed with an explicit fattening.
  double distance_with_fattening(const Word& x, int fattening) const;
  /// True when c is conjugate into H, where l vanishes exactly.
  bool is_elliptic(const CyclicWord& c) const;
  const ConedOffOptions& options() const { return options_; }

 protected:
  double distance_of(std::span<const Letter> reduced) const override;
  LengthValue length_of(const CyclicWord& c) const override;

 private:
  std::vector<Word> generators_;
  Word subgroup_generator_;
  std::vector<Word> jumps_;
  ConedOffOptions options_;
  mutable std::mutex mutex_;
  mutable std::unordered_map<Word, LengthValue, WordHash> length_cache_;
};

/// Sum of c_i * p_i at the translation-length level (and at the distance
/// level when every coefficient is nonnegative and every term has distance).
class LinearCombinationProvider final : public MetricProvider {
 public:
  using Term = std::pair<double, ProviderPtr>;

  LinearCombinationProvider(std::string name, std::vector<Term> terms);

  Capabilities capabilities() const override { return capabilities_; }
  std::optional<std::vector<double>> letter_weight_form() const override;
  double basis_lower_ratio() const override;
  const std::vector<Term>& terms() const { return terms_; }

 protected:
  double distance_of(std::span<const Letter> reduced) const override;
  LengthValue length_of(const CyclicWord& c) const override;

 private:
  std::vector<Term> terms_;
  Capabilities capabilities_;
};

/// l[x] = l_p[phi(x)] for a basis automorphism phi.
class PrecomposedProvider final : public MetricProvider {
 public:
  PrecomposedProvider(std::string name, ProviderPtr base, BasisAutomorphism phi);

  Capabilities capabilities() const override { return base_->capabilities(); }
  std::optional<std::vector<double>> letter_weight_form() const override;
  double basis_lower_ratio() const override { return base_->basis_lower_ratio(); }

 protected:
  double distance_of(std::span<const Letter> reduced) const override;
  LengthValue length_of(const CyclicWord& c) const override;

 private:
  ProviderPtr base_;
  BasisAutomorphism phi_;
};

// -- Provider constructors ---------------------------------------------------

ProviderPtr letter_weight_provider(const GroupContext& ctx, std::vector<double> weights,
                                   std::string name = "letter_weight");
ProviderPtr basis_provider(const GroupContext& ctx);
ProviderPtr word_metric_provider(const GroupContext& ctx, std::vector<Word> generators,
                                 WordMetricOptions options = {}, std::string name = "word_metric");
ProviderPtr coned_off_provider(const GroupContext& ctx, std::vector<Word> generators,
                               const Word& subgroup_generator, ConedOffOptions options = {},
                               std::string name = "coned_off");
ProviderPtr letter_count_provider(const GroupContext& ctx, int generator,
                                  std::string name = {});
/// l = s * l_1 + t * l_2.
ProviderPtr linear_combination(double s, double t, ProviderPtr p1, ProviderPtr p2,
                               std::string name = {});
ProviderPtr scaled(ProviderPtr p, double factor, std::string name = {});
/// l = dil * l_{p_star} - l_p.
ProviderPtr boundary_difference(ProviderPtr p, ProviderPtr p_star, double dil,
                                std::string name = {});
ProviderPtr precompose(ProviderPtr p, const BasisAutomorphism& phi, std::string name = {});

/// Basis generators and their inverses as words.
std::vector<Word> basis_generators(const GroupContext& ctx);
/// S together with the inverses of its elements, deduplicated, shortlex sorted.
std::vector<Word> symmetrize(std::vector<Word> generators);

/// True when l vanishes on every class of cyclic length <= max_length.
bool vanishes_identically(const MetricProvider& p, int max_length);

// -- Derived quantities ------------------------------------------------------

struct StableLength {
  double value = 0.0;
  /// value at floor(N/2) minus value at N (nonnegative).
  double residual = 0.0;
  /// d(o, x^n) for n = 1..N.
  std::vector<double> orbit;
};

/// min over 1 <= n <= N of d(o, x^n) / n for the stored cyclic representative x.
StableLength stable_length(const MetricProvider& p, const CyclicWord& c, int n_max);

enum class GrowthMethod { exact_transfer_matrix, empirical_ball };

struct GrowthRate {
  double value = 0.0;
  GrowthMethod method = GrowthMethod::exact_transfer_matrix;
  double residual = 0.0;
};

/// Exponential growth rate h(d). `radius` is the d-radius of the sampled balls
/// for the empirical method and ignored for the exact one.
GrowthRate growth_rate(const MetricProvider& p, GrowthMethod method, double radius = 14.0);

/// (x|y)_o = (d(o,x) + d(o,y) - d(x,y)) / 2.
double gromov_product(const MetricProvider& p, const Word& x, const Word& y);

struct HyperbolicityDiagnostic {
  double delta_hat = 0.0;
  double alpha_hat = 0.0;
  int radius = 0;
  /// Number of (x, y, w) triples examined.
  std::uint64_t triples = 0;
};

struct HyperbolicityOptions {
  /// Triples are scanned exhaustively on the largest basis ball with at most
  /// this many triples; the rest of the radius is covered by random sampling.
  std::uint64_t exhaustive_triples = 2'000'000;
  std::uint64_t sampled_triples = 200'000;
  std::uint64_t seed = 0x5eed;
};

/// Four-point defect max (min{(x|w),(y|w)} - (x|y)) over triples in the basis
/// ball of `radius`, and the rough-geodesic defect along basis geodesics to
/// powers of short classes.
HyperbolicityDiagnostic estimate_hyperbolicity(const MetricProvider& p, int radius,
                                               HyperbolicityOptions options = {});

struct QiBoundReport {
  /// C(r) for r = 0..radius.
  std::vector<double> constants;
  bool plateau = false;
};

/// Largest violation over pairs in the basis ball of radius r of
///   Dil(d,d*)^-1 (x|y)_d - C <= (x|y)_{d*} <= Dil(d*,d) (x|y)_d + C.
QiBoundReport verify_qi_bounds(const MetricProvider& p, const MetricProvider& p_star,
                               double dil_p_pstar, double dil_pstar_p, int radius);

}  // namespace mstruct
