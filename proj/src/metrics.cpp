#include "mstruct/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <random>
#include <unordered_set>

#include <fmt/format.h>

#include "mstruct/error.hpp"
#include "mstruct/transfer.hpp"
#include "fit.hpp"

namespace mstruct {

namespace {

constexpr double kBallSlack = 1e-9;

void check_context(const GroupContext& ctx, int rank) {
  if (ctx.rank() != rank) {
    throw Error(ErrorKind::context_mismatch,
                fmt::format("element of F_{} passed to a provider on F_{}", rank, ctx.rank()));
  }
}

// Fekete estimate min_{n <= N} d(o, x^n) / n along the stored representative.
StableLength fekete(const MetricProvider& p, const CyclicWord& c, int n_max) {
  StableLength out;
  const Word x = c.as_word();
  Word xn = Word::identity(p.context());
  double best = std::numeric_limits<double>::infinity();
  double best_at_half = best;
  for (int n = 1; n <= n_max; ++n) {
    xn = concat(xn, x);
    const double d = p.distance(xn);
    out.orbit.push_back(d);
    best = std::min(best, d / n);
    if (n == n_max / 2) best_at_half = best;
  }
  out.value = best;
  out.residual = std::isfinite(best_at_half) ? best_at_half - best : 0.0;
  return out;
}

std::string term_name(const std::string& given, const std::string& fallback) {
  return given.empty() ? fallback : given;
}

void require_symmetric(const std::vector<Word>& generators) {
  if (generators.empty()) throw Error(ErrorKind::invalid_input, "generating set is empty");
  for (const Word& s : generators) {
    if (s.is_identity()) {
      throw Error(ErrorKind::invalid_input, "generating set contains the identity");
    }
    if (std::find(generators.begin(), generators.end(), inverse(s)) == generators.end()) {
      throw Error(ErrorKind::not_symmetric,
                  fmt::format("generating set lacks the inverse of {}", s.str()));
    }
  }
}

std::size_t common_prefix(std::span<const Letter> x, std::span<const Letter> y) {
  std::size_t k = 0;
  while (k < x.size() && k < y.size() && x[k] == y[k]) ++k;
  return k;
}

}  // namespace

// -- MetricProvider ------------------------------------------------------------

double MetricProvider::distance(const Word& x) const {
  check_context(ctx_, x.rank());
  return distance_reduced(x.letters());
}

double MetricProvider::distance_reduced(std::span<const Letter> reduced) const {
  if (!capabilities().has_distance) {
    throw Error(ErrorKind::capability_missing,
                fmt::format("provider '{}' has no distance capability", name_));
  }
  return distance_of(reduced);
}

double MetricProvider::distance_of(std::span<const Letter>) const {
  throw Error(ErrorKind::capability_missing,
              fmt::format("provider '{}' has no distance capability", name_));
}

LengthValue MetricProvider::length(const CyclicWord& c) const {
  check_context(ctx_, c.rank());
  return length_of(c);
}

void MetricProvider::for_each_in_ball(double radius, const BallVisitor& visit,
                                      std::uint64_t budget) const {
  const double ratio = basis_lower_ratio();
  if (!capabilities().has_distance || !(ratio > 0)) {
    throw Error(ErrorKind::capability_missing,
                fmt::format("provider '{}' cannot enumerate its balls", name_));
  }
  const int basis_radius = static_cast<int>(std::floor(radius / ratio + kBallSlack));
  if (ball_size(ctx_, basis_radius) > budget) {
    throw Error(ErrorKind::budget_exceeded,
                fmt::format("ball of radius {} needs the basis ball of radius {}", radius,
                            basis_radius));
  }
  for_each_reduced_word(ctx_, basis_radius, [&](std::span<const Letter> letters) {
    const double d = distance_of(letters);
    if (d <= radius + kBallSlack) visit(letters, d);
  });
}

// -- LetterWeightProvider --------------------------------------------------------

LetterWeightProvider::LetterWeightProvider(std::string name, const GroupContext& ctx,
                                           std::vector<double> weights)
    : MetricProvider(std::move(name), ctx), weights_(std::move(weights)) {
  if (static_cast<int>(weights_.size()) != ctx.rank()) {
    throw Error(ErrorKind::invalid_input,
                fmt::format("expected {} weights, got {}", ctx.rank(), weights_.size()));
  }
  for (double w : weights_) {
    if (!(w > 0) || !std::isfinite(w)) {
      throw Error(ErrorKind::invalid_input, fmt::format("nonpositive letter weight {}", w));
    }
  }
}

double LetterWeightProvider::basis_lower_ratio() const {
  return *std::min_element(weights_.begin(), weights_.end());
}

double LetterWeightProvider::distance_of(std::span<const Letter> reduced) const {
  double d = 0.0;
  for (Letter l : reduced) d += weights_[static_cast<std::size_t>(l.generator())];
  return d;
}

LengthValue LetterWeightProvider::length_of(const CyclicWord& c) const {
  return {distance_of(c.letters()), 0.0, true};
}

void LetterWeightProvider::for_each_in_ball(double radius, const BallVisitor& visit,
                                            std::uint64_t budget) const {
  std::vector<Letter> stack;
  std::uint64_t visited = 0;
  const int q = context().alphabet_size();
  std::function<void(double)> dfs = [&](double d) {
    if (++visited > budget) {
      throw Error(ErrorKind::budget_exceeded,
                  fmt::format("ball of radius {} exceeds budget {}", radius, budget));
    }
    visit(stack, d);
    for (int code = 0; code < q; ++code) {
      const Letter l = Letter::from_code(code);
      if (!stack.empty() && stack.back().cancels(l)) continue;
      const double next = d + weights_[static_cast<std::size_t>(l.generator())];
      if (next > radius + kBallSlack) continue;
      stack.push_back(l);
      dfs(next);
      stack.pop_back();
    }
  };
  dfs(0.0);
}

// -- LetterCountProvider ---------------------------------------------------------

LetterCountProvider::LetterCountProvider(std::string name, const GroupContext& ctx, int generator)
    : MetricProvider(std::move(name), ctx), generator_(generator) {
  if (generator < 0 || generator >= ctx.rank()) {
    throw Error(ErrorKind::invalid_input, fmt::format("generator index {} out of range", generator));
  }
}

std::optional<std::vector<double>> LetterCountProvider::letter_weight_form() const {
  std::vector<double> w(static_cast<std::size_t>(context().rank()), 0.0);
  w[static_cast<std::size_t>(generator_)] = 1.0;
  return w;
}

double LetterCountProvider::distance_of(std::span<const Letter> reduced) const {
  return static_cast<double>(std::count_if(reduced.begin(), reduced.end(), [&](Letter l) {
    return l.generator() == generator_;
  }));
}

LengthValue LetterCountProvider::length_of(const CyclicWord& c) const {
  return {distance_of(c.letters()), 0.0, true};
}

// -- WordMetricProvider ----------------------------------------------------------

WordMetricProvider::WordMetricProvider(std::string name, const GroupContext& ctx,
                                       std::vector<Word> generators, WordMetricOptions options)
    : MetricProvider(std::move(name), ctx), generators_(std::move(generators)), options_(options) {
  for (const Word& s : generators_) check_context(ctx, s.rank());
  require_symmetric(generators_);
  std::sort(generators_.begin(), generators_.end());
  generators_.erase(std::unique(generators_.begin(), generators_.end()), generators_.end());
  for (const Word& s : generators_) longest_ = std::max(longest_, s.length());

  std::lock_guard lock(mutex_);
  const auto letters = basis_generators(ctx);
  for (int r = 0; r <= options_.generation_radius; ++r) {
    try {
      grow_locked(r, options_.generation_budget);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::budget_exceeded) throw;
      break;
    }
    if (std::all_of(letters.begin(), letters.end(),
                    [&](const Word& l) { return dist_.count(l) > 0; })) {
      return;
    }
  }
  throw Error(ErrorKind::not_generating,
              fmt::format("generating set does not reach every basis letter within radius {}",
                          options_.generation_radius));
}

double WordMetricProvider::basis_lower_ratio() const {
  return 1.0 / static_cast<double>(longest_);
}

void WordMetricProvider::grow_locked(int radius, std::uint64_t budget) const {
  if (layers_.empty()) {
    const Word o = Word::identity(context());
    layers_.push_back({o});
    dist_.emplace(o, 0);
  }
  while (static_cast<int>(layers_.size()) <= radius) {
    const int r = static_cast<int>(layers_.size());
    std::vector<Word> next;
    const std::size_t prev_size = layers_.back().size();
    for (std::size_t i = 0; i < prev_size; ++i) {
      for (const Word& s : generators_) {
        Word y = concat(layers_.back()[i], s);
        if (dist_.count(y) != 0) continue;
        if (dist_.size() >= budget) {
          throw Error(ErrorKind::budget_exceeded,
                      fmt::format("S-ball of radius {} exceeds budget {}", r, budget));
        }
        dist_.emplace(y, r);
        next.push_back(std::move(y));
      }
    }
    layers_.push_back(std::move(next));
  }
}

double WordMetricProvider::distance_of(std::span<const Letter> reduced) const {
  const Word x = reduce(context(), reduced);
  std::lock_guard lock(mutex_);
  // Meet in the middle: if r <= D <= 2r, the geodesic passes through some y on
  // the S-sphere of radius r with y^-1 x in the S-ball of radius r.
  for (int r = 0;; ++r) {
    grow_locked(r, kDefaultElementBudget);
    if (auto it = dist_.find(x); it != dist_.end()) return it->second;
    // Candidates need |y^-1 x| within the basis radius of the S-ball.
    const std::size_t reach = static_cast<std::size_t>(r) * longest_;
    int best = std::numeric_limits<int>::max();
    for (const Word& y : layers_[static_cast<std::size_t>(r)]) {
      const std::size_t k = common_prefix(y.letters(), x.letters());
      if (y.length() + x.length() - 2 * k > reach) continue;
      if (auto it = dist_.find(concat(inverse(y), x)); it != dist_.end()) {
        best = std::min(best, r + it->second);
      }
    }
    if (best <= 2 * r) {
      far_.emplace(x, best);
      return best;
    }
  }
}

LengthValue WordMetricProvider::length_of(const CyclicWord& c) const {
  const StableLength s = fekete(*this, c, options_.fekete_n);
  return {s.value, s.residual, false};
}

void WordMetricProvider::for_each_in_ball(double radius, const BallVisitor& visit,
                                          std::uint64_t budget) const {
  const int r_max = static_cast<int>(std::floor(radius + kBallSlack));
  std::vector<std::pair<std::vector<Letter>, int>> elements;
  {
    std::lock_guard lock(mutex_);
    grow_locked(r_max, budget);
    for (int r = 0; r <= r_max; ++r) {
      for (const Word& y : layers_[static_cast<std::size_t>(r)]) {
        elements.emplace_back(std::vector<Letter>(y.letters().begin(), y.letters().end()), r);
      }
    }
  }
  for (const auto& [letters, r] : elements) visit(letters, r);
}

// -- ConedOffProvider ------------------------------------------------------------

ConedOffProvider::ConedOffProvider(std::string name, const GroupContext& ctx,
                                   std::vector<Word> generators, Word subgroup_generator,
                                   ConedOffOptions options)
    : MetricProvider(std::move(name), ctx),
      generators_(std::move(generators)),
      subgroup_generator_(std::move(subgroup_generator)),
      options_(options) {
  for (const Word& s : generators_) check_context(ctx, s.rank());
  check_context(ctx, subgroup_generator_.rank());
  require_symmetric(generators_);
  if (subgroup_generator_.is_identity()) {
    throw Error(ErrorKind::invalid_input, "coned subgroup generator is the identity");
  }
  const auto letters = subgroup_generator_.letters();
  if (letters.size() > 1 && letters.front().cancels(letters.back())) {
    throw Error(ErrorKind::invalid_input, "coned subgroup generator must be cyclically reduced");
  }
  if (options_.fattening < 0 || options_.jump_cap < 1 || options_.stability_step < 1) {
    throw Error(ErrorKind::invalid_input, "invalid cone-off search parameters");
  }
  for (int m = 1; m <= options_.jump_cap; ++m) {
    jumps_.push_back(power(subgroup_generator_, m));
    jumps_.push_back(power(subgroup_generator_, -m));
  }
}

double ConedOffProvider::distance_with_fattening(const Word& x, int fattening) const {
  check_context(context(), x.rank());
  if (x.is_identity()) return 0.0;
  const auto target = x.letters();
  auto in_tube = [&](const Word& y) {
    return y.length() - common_prefix(y.letters(), target) <= static_cast<std::size_t>(fattening);
  };
  const std::size_t w_len = subgroup_generator_.length();

  std::unordered_set<Word, WordHash> seen;
  std::deque<std::pair<Word, int>> queue;
  const Word o = Word::identity(context());
  seen.insert(o);
  queue.emplace_back(o, 0);
  auto push = [&](Word y, int d) -> bool {
    if (!in_tube(y) || seen.count(y) != 0) return false;
    if (y == x) return true;
    seen.insert(y);
    queue.emplace_back(std::move(y), d);
    return false;
  };
  while (!queue.empty()) {
    auto [g, d] = std::move(queue.front());
    queue.pop_front();
    for (const Word& s : generators_) {
      if (push(concat(g, s), d + 1)) return d + 1;
    }
    // Beyond this power, g w^m is longer than |x| + 2K and outside the tube.
    const std::size_t reach = g.length() + target.size() + 2 * static_cast<std::size_t>(fattening);
    for (std::size_t i = 0; i < jumps_.size(); ++i) {
      const std::size_t m = i / 2 + 1;
      if (m * w_len > reach) break;
      if (push(concat(g, jumps_[i]), d + 1)) return d + 1;
    }
  }
  throw Error(ErrorKind::non_convergence,
              fmt::format("{} is unreachable inside the fattened neighbourhood (K = {})", x.str(),
                          fattening));
}

ConedDistance ConedOffProvider::distance_report(const Word& x) const {
  const double base = distance_with_fattening(x, options_.fattening);
  const double wider =
      distance_with_fattening(x, options_.fattening + options_.stability_step);
  return {base, base == wider};
}

double ConedOffProvider::distance_of(std::span<const Letter> reduced) const {
  return distance_with_fattening(reduce(context(), reduced), options_.fattening);
}

bool ConedOffProvider::is_elliptic(const CyclicWord& c) const {
  const CyclicWord base = conjugacy_class(subgroup_generator_);
  if (c.length() % base.length() != 0) return false;
  const long m = static_cast<long>(c.length() / base.length());
  return conjugacy_class(power(subgroup_generator_, m)) == c ||
         conjugacy_class(power(subgroup_generator_, -m)) == c;
}

LengthValue ConedOffProvider::length_of(const CyclicWord& c) const {
  const Word key = c.as_word();
  {
    std::lock_guard lock(mutex_);
    if (auto it = length_cache_.find(key); it != length_cache_.end()) return it->second;
  }
  LengthValue value;
  if (is_elliptic(c)) {
    // Conjugates of w^m have bounded orbits, so l vanishes exactly.
    value = {0.0, 0.0, true};
  } else {
    const StableLength s = fekete(*this, c, options_.fekete_n);
    value = {s.value, s.residual, false};
  }
  std::lock_guard lock(mutex_);
  length_cache_.emplace(key, value);
  return value;
}

// -- LinearCombinationProvider ---------------------------------------------------

LinearCombinationProvider::LinearCombinationProvider(std::string name, std::vector<Term> terms)
    : MetricProvider(std::move(name), terms.empty() ? GroupContext(2) : terms.front().second->context()),
      terms_(std::move(terms)) {
  if (terms_.empty()) throw Error(ErrorKind::invalid_input, "empty linear combination");
  capabilities_ = {true, true};
  for (const auto& [coef, p] : terms_) {
    if (!p) throw Error(ErrorKind::invalid_input, "null provider in linear combination");
    if (!(p->context() == context())) {
      throw Error(ErrorKind::context_mismatch, "linear combination across different groups");
    }
    if (!std::isfinite(coef)) throw Error(ErrorKind::invalid_input, "non-finite coefficient");
    const Capabilities caps = p->capabilities();
    capabilities_.has_distance = capabilities_.has_distance && caps.has_distance && coef >= 0;
    capabilities_.exact_translation_length =
        capabilities_.exact_translation_length && caps.exact_translation_length;
  }
}

std::optional<std::vector<double>> LinearCombinationProvider::letter_weight_form() const {
  std::vector<double> total(static_cast<std::size_t>(context().rank()), 0.0);
  for (const auto& [coef, p] : terms_) {
    const auto form = p->letter_weight_form();
    if (!form) return std::nullopt;
    for (std::size_t g = 0; g < total.size(); ++g) total[g] += coef * (*form)[g];
  }
  return total;
}

double LinearCombinationProvider::basis_lower_ratio() const {
  if (!capabilities_.has_distance) return 0.0;
  double ratio = 0.0;
  for (const auto& [coef, p] : terms_) ratio += coef * p->basis_lower_ratio();
  return ratio;
}

double LinearCombinationProvider::distance_of(std::span<const Letter> reduced) const {
  double d = 0.0;
  for (const auto& [coef, p] : terms_) {
    if (coef != 0.0) d += coef * p->distance_reduced(reduced);
  }
  return d;
}

LengthValue LinearCombinationProvider::length_of(const CyclicWord& c) const {
  LengthValue out{0.0, 0.0, true};
  double magnitude = 0.0;
  for (const auto& [coef, p] : terms_) {
    if (coef == 0.0) continue;
    const LengthValue v = p->length(c);
    out.value += coef * v.value;
    out.residual += std::abs(coef) * v.residual;
    out.exact = out.exact && v.exact;
    magnitude += std::abs(coef * v.value);
  }
  if (out.value < -1e-9 * std::max(magnitude, 1e-300)) {
    throw Error(ErrorKind::negative_length,
                fmt::format("'{}' is negative ({}) on the class [{}]", name(), out.value, c.str()));
  }
  out.value = std::max(out.value, 0.0);
  return out;
}

// -- PrecomposedProvider ---------------------------------------------------------

PrecomposedProvider::PrecomposedProvider(std::string name, ProviderPtr base, BasisAutomorphism phi)
    : MetricProvider(std::move(name), base->context()), base_(std::move(base)), phi_(std::move(phi)) {}

std::optional<std::vector<double>> PrecomposedProvider::letter_weight_form() const {
  const auto form = base_->letter_weight_form();
  if (!form) return std::nullopt;
  std::vector<double> out(form->size());
  for (int g = 0; g < context().rank(); ++g) {
    out[static_cast<std::size_t>(g)] =
        (*form)[static_cast<std::size_t>(phi_.apply(Letter(g, 1)).generator())];
  }
  return out;
}

double PrecomposedProvider::distance_of(std::span<const Letter> reduced) const {
  return base_->distance(phi_.apply(reduce(context(), reduced)));
}

LengthValue PrecomposedProvider::length_of(const CyclicWord& c) const {
  return base_->length(phi_.apply(c));
}

// -- Constructors ----------------------------------------------------------------

ProviderPtr letter_weight_provider(const GroupContext& ctx, std::vector<double> weights,
                                   std::string name) {
  return std::make_shared<LetterWeightProvider>(std::move(name), ctx, std::move(weights));
}

ProviderPtr basis_provider(const GroupContext& ctx) {
  return letter_weight_provider(ctx, std::vector<double>(static_cast<std::size_t>(ctx.rank()), 1.0),
                                "basis");
}

ProviderPtr word_metric_provider(const GroupContext& ctx, std::vector<Word> generators,
                                 WordMetricOptions options, std::string name) {
  return std::make_shared<WordMetricProvider>(std::move(name), ctx, std::move(generators), options);
}

ProviderPtr coned_off_provider(const GroupContext& ctx, std::vector<Word> generators,
                               const Word& subgroup_generator, ConedOffOptions options,
                               std::string name) {
  return std::make_shared<ConedOffProvider>(std::move(name), ctx, std::move(generators),
                                            subgroup_generator, options);
}

ProviderPtr letter_count_provider(const GroupContext& ctx, int generator, std::string name) {
  if (name.empty() && generator >= 0 && generator < 26) {
    name = fmt::format("count_{}", static_cast<char>('a' + generator));
  }
  return std::make_shared<LetterCountProvider>(std::move(name), ctx, generator);
}

ProviderPtr linear_combination(double s, double t, ProviderPtr p1, ProviderPtr p2,
                               std::string name) {
  const std::string fallback = fmt::format("{}*{}+{}*{}", s, p1->name(), t, p2->name());
  return std::make_shared<LinearCombinationProvider>(
      term_name(name, fallback),
      std::vector<LinearCombinationProvider::Term>{{s, std::move(p1)}, {t, std::move(p2)}});
}

ProviderPtr scaled(ProviderPtr p, double factor, std::string name) {
  const std::string fallback = fmt::format("{}*{}", factor, p->name());
  return std::make_shared<LinearCombinationProvider>(
      term_name(name, fallback), std::vector<LinearCombinationProvider::Term>{{factor, std::move(p)}});
}

ProviderPtr boundary_difference(ProviderPtr p, ProviderPtr p_star, double dil, std::string name) {
  if (!(dil > 0) || !std::isfinite(dil)) {
    throw Error(ErrorKind::invalid_input, fmt::format("dilation must be positive, got {}", dil));
  }
  const std::string fallback = fmt::format("{}*{}-{}", dil, p_star->name(), p->name());
  return linear_combination(dil, -1.0, std::move(p_star), std::move(p), term_name(name, fallback));
}

ProviderPtr precompose(ProviderPtr p, const BasisAutomorphism& phi, std::string name) {
  const std::string fallback = p->name() + "*phi";
  return std::make_shared<PrecomposedProvider>(term_name(name, fallback), std::move(p), phi);
}

std::vector<Word> basis_generators(const GroupContext& ctx) {
  std::vector<Word> out;
  for (int code = 0; code < ctx.alphabet_size(); ++code) {
    const Letter l = Letter::from_code(code);
    out.push_back(reduce(ctx, std::span<const Letter>(&l, 1)));
  }
  return out;
}

std::vector<Word> symmetrize(std::vector<Word> generators) {
  const std::size_t n = generators.size();
  for (std::size_t i = 0; i < n; ++i) generators.push_back(inverse(generators[i]));
  std::sort(generators.begin(), generators.end());
  generators.erase(std::unique(generators.begin(), generators.end()), generators.end());
  return generators;
}

bool vanishes_identically(const MetricProvider& p, int max_length) {
  for (const CyclicWord& c : enumerate_conj_classes(p.context(), max_length)) {
    if (p.ell(c) != 0.0) return false;
  }
  return true;
}

// -- Derived quantities ----------------------------------------------------------

StableLength stable_length(const MetricProvider& p, const CyclicWord& c, int n_max) {
  if (n_max < 2) throw Error(ErrorKind::invalid_input, "stable_length needs N >= 2");
  if (!p.capabilities().has_distance) {
    throw Error(ErrorKind::capability_missing,
                fmt::format("provider '{}' has no distance capability", p.name()));
  }
  return fekete(p, c, n_max);
}

GrowthRate growth_rate(const MetricProvider& p, GrowthMethod method, double radius) {
  GrowthRate out;
  out.method = method;
  if (method == GrowthMethod::exact_transfer_matrix) {
    const auto weights = p.letter_weight_form();
    if (!weights || std::any_of(weights->begin(), weights->end(), [](double w) { return !(w > 0); })) {
      throw Error(ErrorKind::invalid_input,
                  fmt::format("exact growth needs a positive letter-weight functional ('{}')",
                              p.name()));
    }
    const std::vector<double> zeros(weights->size(), 0.0);
    const double w_min = *std::min_element(weights->begin(), weights->end());
    const double upper = std::log(p.context().alphabet_size() - 1.0) / w_min + 1.0;
    const TransferSolution sol = solve_transfer(zeros, *weights, 0.0, 0.0, upper);
    out.value = sol.s;
    out.residual = sol.residual;
    return out;
  }

  if (!(radius >= 4)) {
    throw Error(ErrorKind::radius_too_small,
                fmt::format("empirical growth needs radius >= 4, got {}", radius));
  }
  if (!p.capabilities().has_distance) {
    throw Error(ErrorKind::capability_missing,
                fmt::format("provider '{}' has no distance capability", p.name()));
  }
  const int t_max = static_cast<int>(std::floor(radius + kBallSlack));
  std::vector<double> shell(static_cast<std::size_t>(t_max) + 1, 0.0);
  p.for_each_in_ball(radius, [&](std::span<const Letter>, double d) {
    const auto bin = static_cast<std::size_t>(std::max(0.0, std::ceil(d - kBallSlack)));
    if (bin < shell.size()) shell[bin] += 1.0;
  });
  std::vector<double> xs;
  std::vector<double> ys;
  double cumulative = 0.0;
  for (int t = 0; t <= t_max; ++t) {
    cumulative += shell[static_cast<std::size_t>(t)];
    if (t >= (t_max + 1) / 2 && t >= 1) {
      xs.push_back(t);
      ys.push_back(std::log(cumulative));
    }
  }
  const detail::SlopeFit fit = detail::fit_slope(xs, ys);
  out.value = fit.slope;
  out.residual = fit.stderr_slope;
  return out;
}

double gromov_product(const MetricProvider& p, const Word& x, const Word& y) {
  return 0.5 * (p.distance(x) + p.distance(y) - p.distance(concat(inverse(x), y)));
}

HyperbolicityDiagnostic estimate_hyperbolicity(const MetricProvider& p, int radius,
                                               HyperbolicityOptions options) {
  if (!p.capabilities().has_distance) {
    throw Error(ErrorKind::capability_missing,
                fmt::format("provider '{}' has no distance capability", p.name()));
  }
  const GroupContext& ctx = p.context();
  HyperbolicityDiagnostic out;
  out.radius = radius;

  std::unordered_map<Word, double, WordHash> memo;
  auto dist = [&](const Word& z) {
    if (auto it = memo.find(z); it != memo.end()) return it->second;
    const double d = p.distance(z);
    memo.emplace(z, d);
    return d;
  };
  auto product = [&](const Word& x, const Word& y) {
    return 0.5 * (dist(x) + dist(y) - dist(concat(inverse(x), y)));
  };
  auto defect = [&](const Word& x, const Word& y, const Word& w) {
    return std::min(product(x, w), product(y, w)) - product(x, y);
  };

  const auto ball = enumerate_ball(ctx, radius);
  int core = 0;
  while (core < radius) {
    const double next = static_cast<double>(ball_size(ctx, core + 1));
    if (next * next * next > static_cast<double>(options.exhaustive_triples)) break;
    ++core;
  }
  const std::size_t core_size = ball_size(ctx, core);
  for (std::size_t i = 0; i < core_size; ++i) {
    for (std::size_t j = 0; j < core_size; ++j) {
      for (std::size_t k = 0; k < core_size; ++k) {
        out.delta_hat = std::max(out.delta_hat, defect(ball[i], ball[j], ball[k]));
        ++out.triples;
      }
    }
  }
  if (core < radius) {
    std::mt19937_64 rng(options.seed);
    std::uniform_int_distribution<std::size_t> pick(0, ball.size() - 1);
    for (std::uint64_t s = 0; s < options.sampled_triples; ++s) {
      const Word& x = ball[pick(rng)];
      const Word& y = ball[pick(rng)];
      const Word& w = ball[pick(rng)];
      out.delta_hat = std::max(out.delta_hat, defect(x, y, w));
      ++out.triples;
    }
  }

  // Rough-geodesic defect |d(z_i, z_j) - (d(o, z_j) - d(o, z_i))| along the
  // basis geodesic to the longest power of each short class inside the ball.
  for (const CyclicWord& c : enumerate_conj_classes(ctx, std::min(2, std::max(1, radius)))) {
    const Word g = c.as_word();
    const long n = std::max<long>(1, radius / static_cast<long>(g.length()));
    const Word target = power(g, n);
    std::vector<Word> prefixes;
    for (std::size_t k = 0; k <= target.length(); ++k) {
      prefixes.push_back(reduce(ctx, target.letters().subspan(0, k)));
    }
    for (std::size_t i = 0; i < prefixes.size(); ++i) {
      for (std::size_t j = i; j < prefixes.size(); ++j) {
        const double gap = dist(concat(inverse(prefixes[i]), prefixes[j]));
        out.alpha_hat =
            std::max(out.alpha_hat, std::abs(gap - (dist(prefixes[j]) - dist(prefixes[i]))));
      }
    }
  }
  out.delta_hat = std::max(out.delta_hat, 0.0);
  return out;
}

QiBoundReport verify_qi_bounds(const MetricProvider& p, const MetricProvider& p_star,
                               double dil_p_pstar, double dil_pstar_p, int radius) {
  if (!(p.context() == p_star.context())) {
    throw Error(ErrorKind::context_mismatch, "providers act on different groups");
  }
  const auto ball = enumerate_ball(p.context(), radius);
  std::vector<double> d(ball.size());
  std::vector<double> ds(ball.size());
  for (std::size_t i = 0; i < ball.size(); ++i) {
    d[i] = p.distance(ball[i]);
    ds[i] = p_star.distance(ball[i]);
  }
  std::vector<double> level_max(static_cast<std::size_t>(radius) + 1, 0.0);
  std::vector<Letter> buffer;
  const auto form = p.letter_weight_form();
  const auto form_star = p_star.letter_weight_form();
  const bool tree = form && form_star;
  std::vector<double> prefix;
  std::vector<double> prefix_star;
  for (std::size_t j = 0; j < ball.size(); ++j) {
    const auto y = ball[j].letters();
    if (tree) {
      prefix.assign(1, 0.0);
      prefix_star.assign(1, 0.0);
      for (Letter l : y) {
        const auto g = static_cast<std::size_t>(l.generator());
        prefix.push_back(prefix.back() + (*form)[g]);
        prefix_star.push_back(prefix_star.back() + (*form_star)[g]);
      }
    }
    for (std::size_t i = 0; i <= j; ++i) {
      // x^-1 y is reduced once the common prefix is cut away.
      const auto x = ball[i].letters();
      const std::size_t k = common_prefix(x, y);
      double prod = 0.0;
      double prod_star = 0.0;
      if (tree) {
        // For letter-weight metrics the product is the weight of the common prefix.
        prod = prefix[k];
        prod_star = prefix_star[k];
      } else {
        buffer.clear();
        for (std::size_t m = x.size(); m > k; --m) buffer.push_back(x[m - 1].inverse());
        buffer.insert(buffer.end(), y.begin() + static_cast<std::ptrdiff_t>(k), y.end());
        prod = 0.5 * (d[i] + d[j] - p.distance_reduced(buffer));
        prod_star = 0.5 * (ds[i] + ds[j] - p_star.distance_reduced(buffer));
      }
      const double violation =
          std::max(prod / dil_p_pstar - prod_star, prod_star - dil_pstar_p * prod);
      double& slot = level_max[y.size()];
      slot = std::max(slot, violation);
    }
  }
  QiBoundReport out;
  double running = 0.0;
  for (double v : level_max) {
    running = std::max(running, v);
    out.constants.push_back(running);
  }
  const std::size_t n = out.constants.size();
  out.plateau = n >= 3 && std::abs(out.constants[n - 1] - out.constants[n - 2]) <= 1e-6 &&
                std::abs(out.constants[n - 2] - out.constants[n - 3]) <= 1e-6;
  return out;
}

}  // namespace mstruct
