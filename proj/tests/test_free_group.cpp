#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>
#include <vector>

#include "mstruct/error.hpp"
#include "mstruct/free_group.hpp"
#include "oracles.hpp"

using namespace mstruct;

namespace {

const GroupContext F2(2);

Word w(const char* s) { return parse_word(F2, s); }

}  // namespace

TEST_CASE("reduce cancels adjacent inverse pairs") {
  CHECK(w("abBa").str() == "aa");
  CHECK(w("").is_identity());
  CHECK(w("aA").is_identity());
  CHECK(w("abBAab").str() == "ab");

  const std::vector<Letter> bad{Letter(0, 1), Letter(2, 1)};
  CHECK_THROWS_AS(reduce(F2, bad), Error);
  try {
    reduce(F2, bad);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::invalid_input);
  }
}

TEST_CASE("concat reduces across the seam") {
  CHECK(concat(w("ab"), w("Ba")).str() == "aa");
  CHECK(concat(w("abA"), Word::identity(F2)) == w("abA"));
  CHECK(concat(w("abA"), inverse(w("abA"))).is_identity());
  const Word u = w("abab");
  const Word v = w("BABa");
  // |uv| = |u| + |v| - 2 * (cancellation depth)
  CHECK(concat(u, v).length() == u.length() + v.length() - 2 * 3);

  const GroupContext F3(3);
  CHECK_THROWS_AS(concat(w("a"), parse_word(F3, "c")), Error);
}

TEST_CASE("cyclic_reduce examples") {
  auto r = cyclic_reduce(w("abA"));
  CHECK(r.cls.str() == "b");
  CHECK(r.conjugator.str() == "a");

  r = cyclic_reduce(w("ab"));
  CHECK(r.cls.str() == "ab");
  CHECK(r.conjugator.is_identity());

  // a b a b a^-1 b^-1 a^-1 peels three layers down to b.
  r = cyclic_reduce(w("ababABA"));
  CHECK(r.cls.str() == "b");
  CHECK(r.conjugator.str() == "aba");

  // bab has rotations bab, abb, bba; the least under a < A < b < B is abb.
  r = cyclic_reduce(w("bab"));
  CHECK(r.cls.str() == "abb");
  CHECK(concat(concat(r.conjugator, r.cls.as_word()), inverse(r.conjugator)) == w("bab"));

  CHECK(conjugacy_class(w("abab")).root_power() == 2);
  CHECK(conjugacy_class(w("aab")).root_power() == 1);
  CHECK(conjugacy_class(w("aaaa")).root_power() == 4);

  CHECK_THROWS_AS(cyclic_reduce(Word::identity(F2)), Error);
}

TEST_CASE("cyclic_reduce agrees with brute force over rotations and conjugators") {
  // Every reduced word of length <= 6: the class must be the least rotation
  // of the brute-force cyclic core, and u = c w c^-1.
  const auto ball = enumerate_ball(F2, 6);
  for (const Word& u : ball) {
    if (u.is_identity()) continue;
    const auto r = cyclic_reduce(u);
    const auto core = oracle::naive_cyclic_core(u.letters());
    CHECK(std::vector<Letter>(r.cls.letters().begin(), r.cls.letters().end()) ==
          oracle::naive_least_rotation(core));
    CHECK(concat(concat(r.conjugator, r.cls.as_word()), inverse(r.conjugator)) == u);
  }
}

TEST_CASE("enumerate_ball sizes and order") {
  CHECK(enumerate_ball(F2, 0).size() == 1);
  CHECK(enumerate_ball(F2, 1).size() == 5);
  for (int n = 0; n <= 6; ++n) {
    const auto ball = enumerate_ball(F2, n);
    CHECK(ball.size() == ball_size(F2, n));
    CHECK(ball.size() == 1 + 2 * (static_cast<std::size_t>(std::pow(3, n)) - 1));
    CHECK(std::is_sorted(ball.begin(), ball.end()));
    CHECK(std::adjacent_find(ball.begin(), ball.end()) == ball.end());
    CHECK(oracle::naive_ball(F2, n) == std::set<Word>(ball.begin(), ball.end()));
  }
  CHECK_THROWS_AS(enumerate_ball(F2, 20, 1000), Error);
}

TEST_CASE("for_each_reduced_word visits the same set as enumerate_ball") {
  std::set<Word> seen;
  for_each_reduced_word(F2, 5, [&](std::span<const Letter> letters) {
    seen.insert(reduce(F2, letters));
  });
  const auto ball = enumerate_ball(F2, 5);
  CHECK(seen == std::set<Word>(ball.begin(), ball.end()));
}

TEST_CASE("enumerate_conj_classes") {
  const auto one = enumerate_conj_classes(F2, 1);
  REQUIRE(one.size() == 4);
  CHECK(one[0].str() == "a");
  CHECK(one[1].str() == "A");
  CHECK(one[2].str() == "b");
  CHECK(one[3].str() == "B");

  const auto two = enumerate_conj_classes(F2, 2);
  CHECK(two.size() == 4 + 8);

  // The class of aba^-1 is [b] and is emitted once, at length 1.
  const auto cls = conjugacy_class(w("abA"));
  CHECK(std::count(two.begin(), two.end(), cls) == 1);

  for (int n = 1; n <= 8; ++n) {
    const auto classes = enumerate_conj_classes(F2, n);
    CHECK(classes.size() == oracle::naive_class_count(F2, n));
    CHECK(std::is_sorted(classes.begin(), classes.end()));
    CHECK(std::adjacent_find(classes.begin(), classes.end()) == classes.end());
  }

  for (const auto& c : enumerate_conj_classes(F2, 6)) {
    std::vector<Letter> rot(c.letters().begin(), c.letters().end());
    for (std::size_t i = 0; i < rot.size(); ++i) {
      std::rotate(rot.begin(), rot.begin() + 1, rot.end());
      CHECK(make_canonical_class(2, rot) == c);
    }
    CHECK(c.non_torsion());
  }
  CHECK_THROWS_AS(enumerate_conj_classes(F2, 0), Error);
  CHECK_THROWS_AS(enumerate_conj_classes(F2, 30), Error);
}

TEST_CASE("reduction properties on random words") {
  std::mt19937_64 rng(20240611);
  std::uniform_int_distribution<int> len(0, 10);
  std::uniform_int_distribution<int> code(0, 3);
  auto random_letters = [&](int n) {
    std::vector<Letter> v;
    for (int i = 0; i < n; ++i) v.push_back(Letter::from_code(code(rng)));
    return v;
  };
  for (int trial = 0; trial < 500; ++trial) {
    const auto raw = random_letters(len(rng));
    const Word u = reduce(F2, raw);
    CHECK(reduce(F2, u.letters()) == u);
    CHECK(u.letters().size() == oracle::naive_reduce(raw).size());

    const Word a = reduce(F2, random_letters(len(rng)));
    const Word b = reduce(F2, random_letters(len(rng)));
    const Word c = reduce(F2, random_letters(len(rng)));
    CHECK(concat(concat(a, b), c) == concat(a, concat(b, c)));

    if (!u.is_identity() && u.length() <= 6) {
      const Word g = reduce(F2, random_letters(len(rng) % 7));
      CHECK(conjugacy_class(concat(concat(g, u), inverse(g))) == conjugacy_class(u));
    }
  }
}

TEST_CASE("basis automorphisms") {
  const auto swap = BasisAutomorphism::swap(F2, 0, 1);
  CHECK(swap.apply(w("abA")).str() == "baB");
  CHECK(swap.apply(conjugacy_class(w("aab"))).str() == "abb");
  CHECK(swap.inverse().apply(swap.apply(w("abAAB"))) == w("abAAB"));
  const BasisAutomorphism invert_a(F2, {0, 1}, {true, false});
  CHECK(invert_a.apply(w("ab")).str() == "Ab");
  CHECK_THROWS_AS(BasisAutomorphism(F2, {0, 0}), Error);
}

TEST_CASE("group context validation and tokens") {
  CHECK_THROWS_AS(GroupContext(1), Error);
  CHECK(parse_token("a-") == Letter(0, -1));
  CHECK(to_token(Letter(1, -1)) == "b-");
  CHECK_THROWS_AS(parse_token("ab"), Error);
  CHECK_THROWS_AS(parse_word(F2, "a1"), Error);
}
