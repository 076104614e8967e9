#pragma once

// Brute-force reference computations used only by tests. Each one avoids the
// library code path it is compared against.

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <set>
#include <vector>

#include "mstruct/free_group.hpp"

namespace oracle {

using mstruct::GroupContext;
using mstruct::Letter;
using mstruct::Word;

inline bool inverse_pair(Letter x, Letter y) {
  return x.generator() == y.generator() && x.sign() == -y.sign();
}

// Repeatedly deletes the first cancelling pair until none is left.
inline std::vector<Letter> naive_reduce(std::vector<Letter> v) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
      if (inverse_pair(v[i], v[i + 1])) {
        v.erase(v.begin() + static_cast<std::ptrdiff_t>(i),
                v.begin() + static_cast<std::ptrdiff_t>(i) + 2);
        changed = true;
        break;
      }
    }
  }
  return v;
}

inline std::vector<Letter> naive_cyclic_core(std::span<const Letter> reduced) {
  std::vector<Letter> v(reduced.begin(), reduced.end());
  while (v.size() >= 2 && inverse_pair(v.front(), v.back())) {
    v.erase(v.begin());
    v.pop_back();
  }
  return v;
}

inline std::vector<Letter> naive_least_rotation(const std::vector<Letter>& v) {
  std::vector<std::vector<Letter>> rotations;
  for (std::size_t r = 0; r < v.size(); ++r) {
    std::vector<Letter> rot(v.begin() + static_cast<std::ptrdiff_t>(r), v.end());
    rot.insert(rot.end(), v.begin(), v.begin() + static_cast<std::ptrdiff_t>(r));
    rotations.push_back(rot);
  }
  return *std::min_element(rotations.begin(), rotations.end());
}

// Every letter sequence of length <= n, reduced and deduplicated.
inline std::set<Word> naive_ball(const GroupContext& ctx, int n) {
  std::set<Word> out;
  const int q = ctx.alphabet_size();
  for (int len = 0; len <= n; ++len) {
    long total = 1;
    for (int i = 0; i < len; ++i) total *= q;
    for (long idx = 0; idx < total; ++idx) {
      std::vector<Letter> seq;
      long x = idx;
      for (int i = 0; i < len; ++i) {
        seq.push_back(Letter::from_code(static_cast<int>(x % q)));
        x /= q;
      }
      out.insert(mstruct::reduce(ctx, naive_reduce(seq)));
    }
  }
  return out;
}

// Number of classes of cyclic length <= n: dedupe cyclically reduced words
// by their least rotation.
inline std::size_t naive_class_count(const GroupContext& ctx, int n) {
  std::set<std::vector<Letter>> reps;
  for (const Word& u : naive_ball(ctx, n)) {
    if (u.is_identity()) continue;
    const auto core = naive_cyclic_core(u.letters());
    reps.insert(naive_least_rotation(core));
  }
  return reps.size();
}

// Letter-count vector of a cyclic word: counts[g] = occurrences of generator g.
inline std::vector<int> generator_counts(std::span<const Letter> letters, int rank) {
  std::vector<int> counts(static_cast<std::size_t>(rank), 0);
  for (Letter l : letters) ++counts[static_cast<std::size_t>(l.generator())];
  return counts;
}

// Growth rate of a letter-weight metric on F_k: the abscissa of convergence of
// the growth series, characterised by sum_g 2 z_g / (1 + z_g) = 1 with
// z_g = exp(-h w_g). Solved by scalar bisection.
inline double letter_weight_growth(const std::vector<double>& weights) {
  auto f = [&](double h) {
    double s = 0.0;
    for (double wg : weights) {
      const double z = std::exp(-h * wg);
      s += 2.0 * z / (1.0 + z);
    }
    return s - 1.0;
  };
  double lo = 0.0;
  double hi = 1.0;
  while (f(hi) > 0) hi *= 2;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Two-variable version: theta(t) solves sum_g 2 z_g / (1 + z_g) = 1 with
// z_g = exp(-t wstar_g - s w_g).
inline double letter_weight_theta(const std::vector<double>& wstar, const std::vector<double>& w,
                                  double t) {
  auto f = [&](double s) {
    double acc = 0.0;
    for (std::size_t g = 0; g < w.size(); ++g) {
      const double z = std::exp(-t * wstar[g] - s * w[g]);
      acc += 2.0 * z / (1.0 + z);
    }
    return acc - 1.0;
  };
  double lo = -1.0;
  double hi = 1.0;
  while (f(lo) < 0) lo *= 2;
  while (f(hi) > 0) hi *= 2;
  for (int i = 0; i < 300; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Distances of every element of the S-ball of the given radius, by BFS over
// naively reduced letter vectors.
inline std::map<std::vector<Letter>, int> cayley_ball(const std::vector<std::vector<Letter>>& gens,
                                                      int radius) {
  std::map<std::vector<Letter>, int> dist{{{}, 0}};
  std::deque<std::vector<Letter>> queue{{}};
  while (!queue.empty()) {
    auto g = queue.front();
    queue.pop_front();
    const int d = dist[g];
    if (d == radius) continue;
    for (const auto& s : gens) {
      auto h = g;
      h.insert(h.end(), s.begin(), s.end());
      h = naive_reduce(h);
      if (dist.emplace(h, d + 1).second) queue.push_back(h);
    }
  }
  return dist;
}

// Coned-off distance restricted to elements of basis length <= |x| + K, the
// region named in the construction: S-steps and jumps g -> g w^m, |m| <= cap,
// each of cost 1.
inline int coned_bfs(const std::vector<std::vector<Letter>>& gens, const std::vector<Letter>& w,
                     const std::vector<Letter>& x, int K, int cap) {
  const std::size_t limit = x.size() + static_cast<std::size_t>(K);
  std::vector<std::vector<Letter>> moves = gens;
  for (int m = 1; m <= cap; ++m) {
    std::vector<Letter> wm, wminus;
    for (int i = 0; i < m; ++i) wm.insert(wm.end(), w.begin(), w.end());
    for (auto it = wm.rbegin(); it != wm.rend(); ++it) wminus.push_back(it->inverse());
    moves.push_back(wm);
    moves.push_back(wminus);
  }
  std::map<std::vector<Letter>, int> dist{{{}, 0}};
  std::deque<std::vector<Letter>> queue{{}};
  while (!queue.empty()) {
    auto g = queue.front();
    queue.pop_front();
    if (g == x) return dist[g];
    for (const auto& s : moves) {
      auto h = g;
      h.insert(h.end(), s.begin(), s.end());
      h = naive_reduce(h);
      if (h.size() > limit) continue;
      if (dist.emplace(h, dist[g] + 1).second) queue.push_back(h);
    }
  }
  return -1;
}

}  // namespace oracle
