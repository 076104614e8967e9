#include "mstruct/free_group.hpp"

#include <algorithm>
#include <cctype>
#include <limits>

#include <fmt/format.h>

#include "mstruct/error.hpp"

namespace mstruct {

char to_char(Letter l) {
  const char base = static_cast<char>('a' + l.generator());
  return l.sign() > 0 ? base : static_cast<char>(std::toupper(static_cast<unsigned char>(base)));
}

std::string to_token(Letter l) {
  std::string s(1, static_cast<char>('a' + l.generator()));
  if (l.sign() < 0) s += '-';
  return s;
}

Letter parse_token(std::string_view token) {
  if (token.empty() || token.size() > 2 || token[0] < 'a' || token[0] > 'z' ||
      (token.size() == 2 && token[1] != '-')) {
    throw Error(ErrorKind::parse_error, fmt::format("bad letter token '{}'", token));
  }
  return Letter(token[0] - 'a', token.size() == 2 ? -1 : 1);
}

GroupContext::GroupContext(int rank) : rank_(rank) {
  if (rank < 2 || rank > 26) {
    throw Error(ErrorKind::invalid_input,
                fmt::format("rank must lie in [2, 26], got {}", rank));
  }
}

std::string Word::str() const {
  if (letters_.empty()) return "1";
  std::string s;
  s.reserve(letters_.size());
  for (Letter l : letters_) s += to_char(l);
  return s;
}

std::strong_ordering Word::operator<=>(const Word& other) const {
  if (auto c = letters_.size() <=> other.letters_.size(); c != 0) return c;
  return std::lexicographical_compare_three_way(letters_.begin(), letters_.end(),
                                                other.letters_.begin(), other.letters_.end());
}

std::size_t WordHash::operator()(const Word& w) const noexcept {
  // FNV-1a over letter codes.
  std::size_t h = 1469598103934665603ull;
  for (Letter l : w.letters()) {
    h ^= static_cast<std::size_t>(l.code()) + 1;
    h *= 1099511628211ull;
  }
  return h;
}

Word reduce(const GroupContext& ctx, std::span<const Letter> letters) {
  std::vector<Letter> out;
  out.reserve(letters.size());
  for (Letter l : letters) {
    if (!ctx.contains(l)) {
      throw Error(ErrorKind::invalid_input,
                  fmt::format("generator index {} out of range for rank {}", l.generator(),
                              ctx.rank()));
    }
    if (!out.empty() && out.back().cancels(l)) {
      out.pop_back();
    } else {
      out.push_back(l);
    }
  }
  return Word(ctx.rank(), std::move(out));
}

Word parse_word(const GroupContext& ctx, std::string_view text) {
  std::vector<Letter> letters;
  if (text == "1" || text.empty()) return Word::identity(ctx);
  for (char ch : text) {
    if (std::isspace(static_cast<unsigned char>(ch))) continue;
    if (ch >= 'a' && ch <= 'z') {
      letters.emplace_back(ch - 'a', 1);
    } else if (ch >= 'A' && ch <= 'Z') {
      letters.emplace_back(ch - 'A', -1);
    } else {
      throw Error(ErrorKind::parse_error, fmt::format("bad character '{}' in word '{}'", ch, text));
    }
  }
  return reduce(ctx, letters);
}

static void check_same_context(const Word& u, const Word& v) {
  if (u.rank() != v.rank()) {
    throw Error(ErrorKind::context_mismatch,
                fmt::format("words from F_{} and F_{}", u.rank(), v.rank()));
  }
}

Word concat(const Word& u, const Word& v) {
  check_same_context(u, v);
  std::vector<Letter> letters(u.letters().begin(), u.letters().end());
  letters.insert(letters.end(), v.letters().begin(), v.letters().end());
  return reduce(u.context(), letters);
}

Word inverse(const Word& u) {
  std::vector<Letter> letters;
  letters.reserve(u.length());
  for (auto it = u.letters().rbegin(); it != u.letters().rend(); ++it) {
    letters.push_back(it->inverse());
  }
  return reduce(u.context(), letters);
}

Word power(const Word& u, long n) {
  const Word base = n < 0 ? inverse(u) : u;
  const long count = n < 0 ? -n : n;
  std::vector<Letter> letters;
  letters.reserve(base.length() * static_cast<std::size_t>(count));
  for (long i = 0; i < count; ++i) {
    letters.insert(letters.end(), base.letters().begin(), base.letters().end());
  }
  return reduce(u.context(), letters);
}

std::size_t least_rotation(std::span<const Letter> w) {
  const std::size_t n = w.size();
  std::size_t best = 0;
  for (std::size_t r = 1; r < n; ++r) {
    for (std::size_t i = 0; i < n; ++i) {
      const Letter x = w[(r + i) % n];
      const Letter y = w[(best + i) % n];
      if (x < y) {
        best = r;
        break;
      }
      if (y < x) break;
    }
  }
  return best;
}

bool is_least_rotation(std::span<const Letter> w) {
  const std::size_t n = w.size();
  for (std::size_t r = 1; r < n; ++r) {
    for (std::size_t i = 0; i < n; ++i) {
      const Letter x = w[(r + i) % n];
      if (x < w[i]) return false;
      if (w[i] < x) break;
    }
  }
  return true;
}

Word CyclicWord::as_word() const { return reduce(GroupContext(rank_), letters_); }

std::string CyclicWord::str() const { return as_word().str(); }

std::strong_ordering CyclicWord::operator<=>(const CyclicWord& other) const {
  if (auto c = letters_.size() <=> other.letters_.size(); c != 0) return c;
  return std::lexicographical_compare_three_way(letters_.begin(), letters_.end(),
                                                other.letters_.begin(), other.letters_.end());
}

CyclicWord make_canonical_class(int rank, std::vector<Letter> w) {
  const std::size_t n = w.size();
  if (n == 0) throw Error(ErrorKind::empty_class, "identity has no conjugacy class in conj'");
  if (n > 1 && w.front().cancels(w.back())) {
    throw Error(ErrorKind::invalid_input, "word is not cyclically reduced");
  }
  std::rotate(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(least_rotation(w)), w.end());
  int root_power = 1;
  for (std::size_t period = 1; period <= n; ++period) {
    if (n % period != 0) continue;
    bool periodic = true;
    for (std::size_t i = 0; i + period < n && periodic; ++i) periodic = w[i] == w[i + period];
    if (periodic) {
      root_power = static_cast<int>(n / period);
      break;
    }
  }
  return CyclicWord(rank, std::move(w), root_power);
}

CyclicReduction cyclic_reduce(const Word& u) {
  if (u.is_identity()) {
    throw Error(ErrorKind::empty_class, "cyclic_reduce of the identity");
  }
  const auto letters = u.letters();
  std::size_t lo = 0;
  std::size_t hi = letters.size();
  while (hi - lo >= 2 && letters[lo].cancels(letters[hi - 1])) {
    ++lo;
    --hi;
  }
  std::vector<Letter> core(letters.begin() + static_cast<std::ptrdiff_t>(lo),
                           letters.begin() + static_cast<std::ptrdiff_t>(hi));
  const std::size_t shift = least_rotation(core);
  // core = x y with |x| = shift, canonical rotation y x = x^-1 core x,
  // so u = (p x) (y x) (p x)^-1 where p is the stripped prefix.
  std::vector<Letter> conj(letters.begin(), letters.begin() + static_cast<std::ptrdiff_t>(lo));
  conj.insert(conj.end(), core.begin(), core.begin() + static_cast<std::ptrdiff_t>(shift));
  const GroupContext ctx = u.context();
  return CyclicReduction{make_canonical_class(u.rank(), std::move(core)), reduce(ctx, conj)};
}

CyclicWord conjugacy_class(const Word& u) { return cyclic_reduce(u).cls; }

CyclicWord parse_class(const GroupContext& ctx, std::string_view text) {
  return conjugacy_class(parse_word(ctx, text));
}

std::uint64_t ball_size(const GroupContext& ctx, int radius) {
  if (radius < 0) return 0;
  const std::uint64_t branch = static_cast<std::uint64_t>(ctx.alphabet_size() - 1);
  std::uint64_t total = 1;
  std::uint64_t sphere = static_cast<std::uint64_t>(ctx.alphabet_size());
  constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();
  for (int n = 1; n <= radius; ++n) {
    if (total > kMax - sphere) return kMax;
    total += sphere;
    if (sphere > kMax / branch) {
      sphere = kMax;
    } else {
      sphere *= branch;
    }
  }
  return total;
}

std::vector<Word> enumerate_ball(const GroupContext& ctx, int radius, std::uint64_t budget) {
  if (radius < 0) throw Error(ErrorKind::invalid_input, "radius must be >= 0");
  const std::uint64_t size = ball_size(ctx, radius);
  if (size > budget) {
    throw Error(ErrorKind::budget_exceeded,
                fmt::format("ball of radius {} has {} elements, budget {}", radius, size, budget));
  }
  std::vector<Word> ball;
  ball.reserve(size);
  ball.push_back(Word::identity(ctx));
  std::size_t level_begin = 0;
  for (int n = 1; n <= radius; ++n) {
    const std::size_t level_end = ball.size();
    for (std::size_t i = level_begin; i < level_end; ++i) {
      for (int code = 0; code < ctx.alphabet_size(); ++code) {
        const Letter l = Letter::from_code(code);
        const auto parent = ball[i].letters();
        if (!parent.empty() && parent.back().cancels(l)) continue;
        std::vector<Letter> child(parent.begin(), parent.end());
        child.push_back(l);
        ball.push_back(reduce(ctx, child));
      }
    }
    level_begin = level_end;
  }
  return ball;
}

namespace {

void visit_words(const GroupContext& ctx, int radius, std::vector<Letter>& stack,
                 const std::function<void(std::span<const Letter>)>& visit) {
  visit(stack);
  if (static_cast<int>(stack.size()) == radius) return;
  for (int code = 0; code < ctx.alphabet_size(); ++code) {
    const Letter l = Letter::from_code(code);
    if (!stack.empty() && stack.back().cancels(l)) continue;
    stack.push_back(l);
    visit_words(ctx, radius, stack, visit);
    stack.pop_back();
  }
}

// Extends `stack` to length n keeping it a candidate least rotation: no letter
// may be smaller than the first one.
void visit_necklaces(const GroupContext& ctx, std::size_t n, std::vector<Letter>& stack,
                     std::vector<CyclicWord>& out) {
  if (stack.size() == n) {
    if (n > 1 && stack.front().cancels(stack.back())) return;
    if (!is_least_rotation(stack)) return;
    out.push_back(make_canonical_class(ctx.rank(), stack));
    return;
  }
  for (int code = stack.empty() ? 0 : stack.front().code(); code < ctx.alphabet_size(); ++code) {
    const Letter l = Letter::from_code(code);
    if (!stack.empty() && stack.back().cancels(l)) continue;
    stack.push_back(l);
    visit_necklaces(ctx, n, stack, out);
    stack.pop_back();
  }
}

}  // namespace

void for_each_reduced_word(const GroupContext& ctx, int radius,
                           const std::function<void(std::span<const Letter>)>& visit) {
  if (radius < 0) throw Error(ErrorKind::invalid_input, "radius must be >= 0");
  std::vector<Letter> stack;
  stack.reserve(static_cast<std::size_t>(radius));
  visit_words(ctx, radius, stack, visit);
}

std::vector<CyclicWord> enumerate_conj_classes(const GroupContext& ctx, int max_cyclic_length,
                                               std::uint64_t budget) {
  if (max_cyclic_length < 1) {
    throw Error(ErrorKind::invalid_input, "max_cyclic_length must be >= 1");
  }
  // Every class is represented by a reduced word of that length, so the
  // sphere sizes bound the work.
  if (ball_size(ctx, max_cyclic_length) > budget) {
    throw Error(ErrorKind::budget_exceeded,
                fmt::format("class enumeration to length {} exceeds budget {}", max_cyclic_length,
                            budget));
  }
  std::vector<CyclicWord> out;
  std::vector<Letter> stack;
  for (int n = 1; n <= max_cyclic_length; ++n) {
    visit_necklaces(ctx, static_cast<std::size_t>(n), stack, out);
  }
  return out;
}

BasisAutomorphism::BasisAutomorphism(const GroupContext& ctx, std::vector<int> permutation,
                                     std::vector<bool> inverted)
    : ctx_(ctx), permutation_(std::move(permutation)), inverted_(std::move(inverted)) {
  if (inverted_.empty()) inverted_.assign(static_cast<std::size_t>(ctx.rank()), false);
  std::vector<int> sorted = permutation_;
  std::sort(sorted.begin(), sorted.end());
  bool valid = static_cast<int>(sorted.size()) == ctx.rank() &&
               inverted_.size() == sorted.size();
  for (int i = 0; valid && i < ctx.rank(); ++i) valid = sorted[static_cast<std::size_t>(i)] == i;
  if (!valid) throw Error(ErrorKind::invalid_input, "not a permutation of the basis");
}

BasisAutomorphism BasisAutomorphism::swap(const GroupContext& ctx, int i, int j) {
  std::vector<int> perm(static_cast<std::size_t>(ctx.rank()));
  for (int g = 0; g < ctx.rank(); ++g) perm[static_cast<std::size_t>(g)] = g;
  std::swap(perm.at(static_cast<std::size_t>(i)), perm.at(static_cast<std::size_t>(j)));
  return BasisAutomorphism(ctx, std::move(perm));
}

Letter BasisAutomorphism::apply(Letter l) const {
  const auto g = static_cast<std::size_t>(l.generator());
  const int sign = inverted_[g] ? -l.sign() : l.sign();
  return Letter(permutation_[g], sign);
}

Word BasisAutomorphism::apply(const Word& w) const {
  std::vector<Letter> letters;
  letters.reserve(w.length());
  for (Letter l : w.letters()) letters.push_back(apply(l));
  return reduce(ctx_, letters);
}

CyclicWord BasisAutomorphism::apply(const CyclicWord& c) const {
  std::vector<Letter> letters;
  letters.reserve(c.length());
  for (Letter l : c.letters()) letters.push_back(apply(l));
  return make_canonical_class(ctx_.rank(), std::move(letters));
}

BasisAutomorphism BasisAutomorphism::inverse() const {
  std::vector<int> perm(permutation_.size());
  std::vector<bool> inv(permutation_.size());
  for (std::size_t g = 0; g < permutation_.size(); ++g) {
    perm[static_cast<std::size_t>(permutation_[g])] = static_cast<int>(g);
    inv[static_cast<std::size_t>(permutation_[g])] = inverted_[g];
  }
  return BasisAutomorphism(ctx_, std::move(perm), std::move(inv));
}

}  // namespace mstruct
