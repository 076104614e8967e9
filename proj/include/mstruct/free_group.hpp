#pragma once

// Exact combinatorics of the free group F_k on generators a, b, c, ...
//
// Letters are ordered a < A < b < B < ... where an uppercase letter denotes
// the inverse generator. Every Word is freely reduced; every CyclicWord is
// cyclically reduced and stored as its lexicographically least rotation.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mstruct {

inline constexpr std::uint64_t kDefaultElementBudget = 10'000'000;

class Letter {
 public:
  constexpr Letter() = default;
  constexpr Letter(int generator, int sign)
      : code_(static_cast<std::uint8_t>(2 * generator + (sign < 0 ? 1 : 0))) {}

  static constexpr Letter from_code(int code) {
    Letter l;
    l.code_ = static_cast<std::uint8_t>(code);
    return l;
  }

  constexpr int generator() const { return code_ >> 1; }
  constexpr int sign() const { return (code_ & 1) ? -1 : 1; }
  constexpr int code() const { return code_; }
  constexpr Letter inverse() const { return from_code(code_ ^ 1); }
  constexpr bool cancels(Letter other) const { return (code_ ^ 1) == other.code_; }

  constexpr auto operator<=>(const Letter&) const = default;

 private:
  std::uint8_t code_ = 0;
};

/// Single-character form: 'a' for a, 'A' for a^-1.
char to_char(Letter l);
/// Token form used by structure files: "a" or "a-".
std::string to_token(Letter l);
Letter parse_token(std::string_view token);

class GroupContext {
 public:
  explicit GroupContext(int rank);

  int rank() const { return rank_; }
  int alphabet_size() const { return 2 * rank_; }
  bool contains(Letter l) const { return l.generator() < rank_; }

  bool operator==(const GroupContext&) const = default;

 private:
  int rank_;
};

/// A freely reduced word; the empty word is the identity.
class Word {
 public:
  Word() = default;

  static Word identity(const GroupContext& ctx) { return Word(ctx.rank(), {}); }

  int rank() const { return rank_; }
  GroupContext context() const { return GroupContext(rank_); }
  std::span<const Letter> letters() const { return letters_; }
  std::size_t length() const { return letters_.size(); }
  bool is_identity() const { return letters_.empty(); }
  Letter operator[](std::size_t i) const { return letters_[i]; }

  std::string str() const;

  bool operator==(const Word&) const = default;
  /// Shortlex order.
  std::strong_ordering operator<=>(const Word& other) const;

 private:
  friend Word reduce(const GroupContext&, std::span<const Letter>);
  Word(int rank, std::vector<Letter> letters) : rank_(rank), letters_(std::move(letters)) {}

  int rank_ = 2;
  std::vector<Letter> letters_;
};

struct WordHash {
  std::size_t operator()(const Word& w) const noexcept;
};

/// A conjugacy class of non-trivial elements, stored as its canonical rotation.
class CyclicWord {
 public:
  int rank() const { return rank_; }
  std::span<const Letter> letters() const { return letters_; }
  std::size_t length() const { return letters_.size(); }
  /// n such that the stored word is (primitive root)^n.
  int root_power() const { return root_power_; }
  /// Free groups are torsion-free, so every class is non-torsion.
  bool non_torsion() const { return true; }

  /// The stored rotation read as a group element.
  Word as_word() const;
  std::string str() const;

  bool operator==(const CyclicWord&) const = default;
  std::strong_ordering operator<=>(const CyclicWord& other) const;

 private:
  friend CyclicWord make_canonical_class(int rank, std::vector<Letter> cyclically_reduced);
  CyclicWord(int rank, std::vector<Letter> letters, int root_power)
      : rank_(rank), letters_(std::move(letters)), root_power_(root_power) {}

  int rank_ = 2;
  std::vector<Letter> letters_;
  int root_power_ = 1;
};

struct CyclicReduction {
  CyclicWord cls;
  /// c with u = c * cls.as_word() * c^-1.
  Word conjugator;
};

Word reduce(const GroupContext& ctx, std::span<const Letter> letters);
Word parse_word(const GroupContext& ctx, std::string_view text);

Word concat(const Word& u, const Word& v);
Word inverse(const Word& u);
Word power(const Word& u, long n);

CyclicReduction cyclic_reduce(const Word& u);
/// Canonical class of an already cyclically reduced, non-empty letter sequence.
CyclicWord make_canonical_class(int rank, std::vector<Letter> cyclically_reduced);
/// Class of a non-trivial element.
CyclicWord conjugacy_class(const Word& u);
CyclicWord parse_class(const GroupContext& ctx, std::string_view text);

/// Index of the lexicographically least rotation of a cyclically reduced word.
std::size_t least_rotation(std::span<const Letter> w);
bool is_least_rotation(std::span<const Letter> w);

/// Number of reduced words of length <= radius (saturates at UINT64_MAX).
std::uint64_t ball_size(const GroupContext& ctx, int radius);

/// All reduced words of length <= radius, each once, in shortlex order.
std::vector<Word> enumerate_ball(const GroupContext& ctx, int radius,
                                 std::uint64_t budget = kDefaultElementBudget);

/// Depth-first visit of every reduced word of length <= radius, identity
/// included. The span is valid only during the callback.
void for_each_reduced_word(const GroupContext& ctx, int radius,
                           const std::function<void(std::span<const Letter>)>& visit);

/// Canonical representatives of all non-trivial classes of cyclic length
/// <= max_cyclic_length, in shortlex order.
std::vector<CyclicWord> enumerate_conj_classes(const GroupContext& ctx, int max_cyclic_length,
                                               std::uint64_t budget = kDefaultElementBudget);

/// Automorphism permuting the basis and inverting some generators.
class BasisAutomorphism {
 public:
  BasisAutomorphism(const GroupContext& ctx, std::vector<int> permutation,
                    std::vector<bool> inverted = {});

  static BasisAutomorphism swap(const GroupContext& ctx, int i, int j);

  Letter apply(Letter l) const;
  Word apply(const Word& w) const;
  CyclicWord apply(const CyclicWord& c) const;
  BasisAutomorphism inverse() const;

 private:
  GroupContext ctx_;
  std::vector<int> permutation_;
  std::vector<bool> inverted_;
};

}  // namespace mstruct
