#include "mstruct/automaton.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <unordered_set>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "mstruct/error.hpp"
#include "mstruct/perron.hpp"

namespace mstruct {

using nlohmann::json;

StronglyMarkovStructure::StronglyMarkovStructure(const GroupContext& ctx, int vertex_count,
                                                 int initial, std::vector<StructureEdge> edges)
    : ctx_(ctx), vertex_count_(vertex_count), initial_(initial), edges_(std::move(edges)) {
  if (vertex_count_ < 1) {
    throw Error(ErrorKind::invalid_input, "structure needs at least one vertex");
  }
  if (initial_ < 0 || initial_ >= vertex_count_) {
    throw Error(ErrorKind::invalid_input,
                fmt::format("initial vertex {} out of range [0, {})", initial_, vertex_count_));
  }
  out_.resize(static_cast<std::size_t>(vertex_count_));
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const StructureEdge& e = edges_[i];
    if (e.from < 0 || e.from >= vertex_count_ || e.to < 0 || e.to >= vertex_count_) {
      throw Error(ErrorKind::invalid_input,
                  fmt::format("edge {} has a dangling vertex id ({} -> {})", i, e.from, e.to));
    }
    if (!ctx_.contains(e.label)) {
      throw Error(ErrorKind::invalid_input,
                  fmt::format("edge {} label index {} outside the alphabet of F_{}", i,
                              e.label.code(), ctx_.rank()));
    }
    out_[static_cast<std::size_t>(e.from)].push_back(i);
  }
}

StronglyMarkovStructure parse_structure(const json& doc) {
  try {
    const int rank = doc.value("rank", 2);
    const GroupContext ctx(rank);
    std::vector<StructureEdge> edges;
    for (const json& e : doc.at("edges")) {
      StructureEdge edge;
      edge.from = e.at("from").get<int>();
      edge.to = e.at("to").get<int>();
      const json& label = e.at("label");
      if (label.is_number_integer()) {
        const int code = label.get<int>();
        if (code < 0 || code >= ctx.alphabet_size()) {
          throw Error(ErrorKind::invalid_input,
                      fmt::format("label index {} outside the alphabet of F_{}", code, rank));
        }
        edge.label = Letter::from_code(code);
      } else {
        edge.label = parse_token(label.get<std::string>());
      }
      edges.push_back(edge);
    }
    return StronglyMarkovStructure(ctx, doc.at("vertices").get<int>(), doc.at("initial").get<int>(),
                                   std::move(edges));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse_error, fmt::format("malformed structure document: {}", e.what()));
  }
}

StronglyMarkovStructure load_structure(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::parse_error, fmt::format("cannot open {}", path.string()));
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse_error, fmt::format("{}: {}", path.string(), e.what()));
  }
  return parse_structure(doc);
}

json to_json(const StronglyMarkovStructure& s) {
  json edges = json::array();
  for (const StructureEdge& e : s.edges()) {
    edges.push_back({{"from", e.from}, {"to", e.to}, {"label", to_token(e.label)}});
  }
  return {{"rank", s.context().rank()},
          {"vertices", s.vertex_count()},
          {"initial", s.initial()},
          {"edges", edges}};
}

StronglyMarkovStructure shortlex_structure(const GroupContext& ctx) {
  const int q = ctx.alphabet_size();
  std::vector<StructureEdge> edges;
  for (int v = 0; v < q; ++v) edges.push_back({0, v + 1, Letter::from_code(v)});
  for (int u = 0; u < q; ++u) {
    for (int v = 0; v < q; ++v) {
      if (Letter::from_code(u).cancels(Letter::from_code(v))) continue;
      edges.push_back({u + 1, v + 1, Letter::from_code(v)});
    }
  }
  return StronglyMarkovStructure(ctx, q + 1, 0, std::move(edges));
}

// -- Bijection check -------------------------------------------------------------

BijectionReport validate_bijection(const StronglyMarkovStructure& s, int radius,
                                   std::uint64_t budget) {
  if (radius < 0) throw Error(ErrorKind::invalid_input, "radius must be nonnegative");
  const GroupContext& ctx = s.context();
  BijectionReport report;
  report.radius = radius;
  report.path_counts.assign(static_cast<std::size_t>(radius) + 1, 0);

  std::unordered_set<Word, WordHash> images;
  std::vector<std::size_t> path;
  std::vector<Letter> image;  // free reduction of the labels read so far
  std::uint64_t visited = 0;

  auto fail = [&](std::string why) {
    report.passed = false;
    report.failure = std::move(why);
    report.counterexample = path;
    std::vector<std::string> labels;
    for (std::size_t e : path) labels.push_back(to_token(s.edges()[e].label));
    report.counterexample_word = fmt::format("{}", fmt::join(labels, " "));
  };

  std::function<bool(int)> dfs = [&](int v) -> bool {
    if (++visited > budget) {
      throw Error(ErrorKind::budget_exceeded,
                  fmt::format("more than {} paths of length <= {}", budget, radius));
    }
    ++report.path_counts[path.size()];
    if (image.size() != path.size()) {
      fail(fmt::format("path of length {} reads an element of word length {}", path.size(),
                       image.size()));
      return false;
    }
    if (!images.insert(reduce(ctx, image)).second) {
      fail("two paths read the same element");
      return false;
    }
    if (static_cast<int>(path.size()) == radius) return true;
    for (std::size_t e : s.out_edges()[static_cast<std::size_t>(v)]) {
      const Letter l = s.edges()[e].label;
      const bool cancels = !image.empty() && image.back().cancels(l);
      if (cancels) {
        image.pop_back();
      } else {
        image.push_back(l);
      }
      path.push_back(e);
      const bool ok = dfs(s.edges()[e].to);
      path.pop_back();
      if (cancels) {
        image.push_back(l.inverse());
      } else {
        image.pop_back();
      }
      if (!ok) return false;
    }
    return true;
  };

  if (dfs(s.initial()) && images.size() != ball_size(ctx, radius)) {
    // Every image has length <= radius, so a shortfall means the ball is not covered.
    report.passed = false;
    report.failure = fmt::format("paths reach {} of the {} elements of the ball of radius {}",
                                 images.size(), ball_size(ctx, radius), radius);
  }
  return report;
}

// -- Components ------------------------------------------------------------------

namespace {

std::vector<std::vector<int>> strongly_connected(const StronglyMarkovStructure& s) {
  const int n = s.vertex_count();
  std::vector<int> index(static_cast<std::size_t>(n), -1);
  std::vector<int> low(static_cast<std::size_t>(n), 0);
  std::vector<bool> on_stack(static_cast<std::size_t>(n), false);
  std::vector<int> stack;
  std::vector<std::vector<int>> out;
  int counter = 0;
  std::function<void(int)> visit = [&](int v) {
    const auto vi = static_cast<std::size_t>(v);
    index[vi] = low[vi] = counter++;
    stack.push_back(v);
    on_stack[vi] = true;
    for (std::size_t e : s.out_edges()[vi]) {
      const int u = s.edges()[e].to;
      const auto ui = static_cast<std::size_t>(u);
      if (index[ui] < 0) {
        visit(u);
        low[vi] = std::min(low[vi], low[ui]);
      } else if (on_stack[ui]) {
        low[vi] = std::min(low[vi], index[ui]);
      }
    }
    if (low[vi] == index[vi]) {
      std::vector<int> comp;
      int u = -1;
      do {
        u = stack.back();
        stack.pop_back();
        on_stack[static_cast<std::size_t>(u)] = false;
        comp.push_back(u);
      } while (u != v);
      std::sort(comp.begin(), comp.end());
      out.push_back(std::move(comp));
    }
  };
  for (int v = 0; v < n; ++v) {
    if (index[static_cast<std::size_t>(v)] < 0) visit(v);
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool has_self_loop(const StronglyMarkovStructure& s, int v) {
  for (std::size_t e : s.out_edges()[static_cast<std::size_t>(v)]) {
    if (s.edges()[e].to == v) return true;
  }
  return false;
}

// Edge indices of shortest paths inside `members`, from `from` to every vertex.
std::vector<std::vector<std::size_t>> component_paths(const StronglyMarkovStructure& s,
                                                      const std::vector<bool>& members, int from) {
  std::vector<std::vector<std::size_t>> paths(static_cast<std::size_t>(s.vertex_count()));
  std::vector<bool> seen(static_cast<std::size_t>(s.vertex_count()), false);
  std::deque<int> queue{from};
  seen[static_cast<std::size_t>(from)] = true;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    for (std::size_t e : s.out_edges()[static_cast<std::size_t>(v)]) {
      const auto u = static_cast<std::size_t>(s.edges()[e].to);
      if (!members[u] || seen[u]) continue;
      seen[u] = true;
      paths[u] = paths[static_cast<std::size_t>(v)];
      paths[u].push_back(e);
      queue.push_back(static_cast<int>(u));
    }
  }
  return paths;
}

}  // namespace

std::vector<ComponentReport> component_analysis(const StronglyMarkovStructure& s) {
  std::vector<ComponentReport> out;
  for (auto& comp : strongly_connected(s)) {
    const bool trivial = comp.size() == 1 && !has_self_loop(s, comp.front());
    if (trivial && comp.front() == s.initial()) continue;
    ComponentReport report;
    report.id = static_cast<int>(out.size());
    report.vertices = comp;
    if (!trivial) {
      const std::size_t n = comp.size();
      std::vector<int> local(static_cast<std::size_t>(s.vertex_count()), -1);
      for (std::size_t i = 0; i < n; ++i) local[static_cast<std::size_t>(comp[i])] = static_cast<int>(i);
      std::vector<double> matrix(n * n, 0.0);
      for (int v : comp) {
        for (std::size_t e : s.out_edges()[static_cast<std::size_t>(v)]) {
          const int u = local[static_cast<std::size_t>(s.edges()[e].to)];
          if (u < 0) continue;
          // 0-1 adjacency: parallel edges count once.
          matrix[static_cast<std::size_t>(local[static_cast<std::size_t>(v)]) * n +
                 static_cast<std::size_t>(u)] = 1.0;
        }
      }
      const PerronResult root = perron_root(matrix, n, 1e-12, 100000);
      report.spectral_radius = root.radius;
      report.residual = root.residual;
    }
    out.push_back(std::move(report));
  }
  double top = 0.0;
  for (const auto& c : out) top = std::max(top, c.spectral_radius);
  for (auto& c : out) c.maximal = c.spectral_radius >= top - 1e-9 * std::max(1.0, top);
  return out;
}

double structure_growth(const std::vector<ComponentReport>& components) {
  double top = 0.0;
  for (const auto& c : components) top = std::max(top, c.spectral_radius);
  return top > 1.0 ? std::log(top) : 0.0;
}

// -- Axial witnesses -------------------------------------------------------------

namespace {

double tree_gromov(const Word& x, const Word& y) {
  std::size_t k = 0;
  while (k < x.length() && k < y.length() && x.letters()[k] == y.letters()[k]) ++k;
  return static_cast<double>(k);
}

}  // namespace

AxialWitness axial_witness(const StronglyMarkovStructure& s, const Word& x, int search_radius,
                           int check_power) {
  const GroupContext& ctx = s.context();
  if (x.rank() != ctx.rank()) throw Error(ErrorKind::context_mismatch, "element outside the structure's group");
  if (x.is_identity()) throw Error(ErrorKind::invalid_input, "axial witness needs a nontrivial element");
  if (search_radius < 0 || check_power < 1) {
    throw Error(ErrorKind::invalid_input, "search radius must be >= 0 and check power >= 1");
  }

  const auto components = component_analysis(s);
  const ComponentReport* chosen = nullptr;
  for (const auto& c : components) {
    if (c.maximal && c.spectral_radius > 0 && (!chosen || c.vertices.size() > chosen->vertices.size())) {
      chosen = &c;
    }
  }
  if (!chosen) throw Error(ErrorKind::witness_not_found, "structure has no nontrivial component");

  std::vector<bool> members(static_cast<std::size_t>(s.vertex_count()), false);
  for (int v : chosen->vertices) members[static_cast<std::size_t>(v)] = true;
  std::vector<std::vector<std::vector<std::size_t>>> paths(static_cast<std::size_t>(s.vertex_count()));
  int diameter = 0;
  for (int v : chosen->vertices) {
    paths[static_cast<std::size_t>(v)] = component_paths(s, members, v);
    for (int u : chosen->vertices) {
      diameter = std::max(diameter, static_cast<int>(paths[static_cast<std::size_t>(v)]
                                                          [static_cast<std::size_t>(u)].size()));
    }
  }
  auto label_word = [&](const std::vector<std::size_t>& edge_ids) {
    std::vector<Letter> labels;
    for (std::size_t e : edge_ids) labels.push_back(s.edges()[e].label);
    return reduce(ctx, labels);
  };

  // Shortest return path over all runs reading r inside the component.
  auto close_loop = [&](const Word& r) -> std::optional<Word> {
    std::optional<Word> best;
    for (int start : chosen->vertices) {
      std::set<int> current{start};
      for (Letter l : r.letters()) {
        std::set<int> next;
        for (int v : current) {
          for (std::size_t e : s.out_edges()[static_cast<std::size_t>(v)]) {
            const StructureEdge& edge = s.edges()[e];
            if (edge.label == l && members[static_cast<std::size_t>(edge.to)]) next.insert(edge.to);
          }
        }
        current = std::move(next);
        if (current.empty()) break;
      }
      for (int end : current) {
        Word w = label_word(paths[static_cast<std::size_t>(end)][static_cast<std::size_t>(start)]);
        if (!best || w.length() < best->length()) best = std::move(w);
      }
    }
    return best;
  };

  const auto ball = enumerate_ball(ctx, search_radius);
  for (int total = 0; total <= 2 * search_radius; ++total) {
    for (const Word& s1 : ball) {
      const int l1 = static_cast<int>(s1.length());
      if (l1 > total) break;
      const int l2 = total - l1;
      if (l2 > search_radius) continue;
      for (const Word& s2 : ball) {
        if (static_cast<int>(s2.length()) < l2) continue;
        if (static_cast<int>(s2.length()) > l2) break;
        const Word r = concat(concat(inverse(s1), x), inverse(s2));
        if (r.is_identity()) continue;
        auto w = close_loop(r);
        if (!w) continue;

        AxialWitness out;
        out.x = x;
        out.s1 = s1;
        out.r = r;
        out.s2 = s2;
        out.w = *w;
        out.gamma = concat(concat(concat(s1, r), *w), inverse(s1));
        out.component = chosen->id;
        out.component_diameter = diameter;
        out.check_power = check_power;
        out.displacement = static_cast<double>(concat(inverse(x), out.gamma).length());
        out.displacement_bound = diameter + 2.0 * search_radius;
        out.axiality_bound = 3.0 * search_radius;
        for (int m = 0; m <= check_power; ++m) {
          const Word gm = power(out.gamma, -m);
          for (int n = 0; n <= check_power; ++n) {
            out.axiality = std::max(out.axiality, tree_gromov(gm, power(out.gamma, n)));
          }
        }
        return out;
      }
    }
  }
  throw Error(ErrorKind::witness_not_found,
              fmt::format("no decomposition of {} within search radius {}", x.str(), search_radius));
}

// -- Distance versus translation length ------------------------------------------

double length_gap(const MetricProvider& p, const Word& x, const std::vector<Word>& B) {
  double best = -std::numeric_limits<double>::infinity();
  for (const Word& u : B) {
    const Word xu = concat(x, u);
    best = std::max(best, xu.is_identity() ? 0.0 : p.ell(conjugacy_class(xu)));
  }
  return p.distance(x) - best;
}

LengthGapReport distance_vs_length_check(const MetricProvider& p, const std::vector<Word>& B,
                                         int radius) {
  if (B.empty()) throw Error(ErrorKind::invalid_input, "thickening set is empty");
  if (!p.capabilities().has_distance) {
    throw Error(ErrorKind::capability_missing,
                fmt::format("provider '{}' has no distance capability", p.name()));
  }
  LengthGapReport out;
  out.per_radius.assign(static_cast<std::size_t>(radius) + 1,
                        -std::numeric_limits<double>::infinity());
  for (const Word& x : enumerate_ball(p.context(), radius)) {
    double& slot = out.per_radius[x.length()];
    slot = std::max(slot, length_gap(p, x, B));
  }
  for (std::size_t r = 1; r < out.per_radius.size(); ++r) {
    out.per_radius[r] = std::max(out.per_radius[r], out.per_radius[r - 1]);
  }
  out.constant = out.per_radius.back();
  return out;
}

}  // namespace mstruct
