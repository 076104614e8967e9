#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>

#include <fmt/format.h>

#include "cli.hpp"
#include "mstruct/automaton.hpp"
#include "mstruct/error.hpp"
#include "mstruct/manhattan.hpp"
#include "mstruct/structures.hpp"

namespace mstruct::cli {

using nlohmann::json;

namespace {

std::string num(double v) { return fmt::format("{:.15g}", v); }

std::string witness_str(const std::optional<CyclicWord>& c) { return c ? c->str() : ""; }

std::pair<ProviderPtr, ProviderPtr> pair_of(const Config& config, const Task& task) {
  const auto comma = task.pair.find(',');
  if (task.pair.empty() || comma == std::string::npos) {
    throw Error(ErrorKind::invalid_input,
                fmt::format("'{}' needs --pair NAME,NAME", task.command));
  }
  return {config.provider(task.pair.substr(0, comma)), config.provider(task.pair.substr(comma + 1))};
}

int length_or(const Task& task, int fallback) { return task.max_length > 0 ? task.max_length : fallback; }

// Enumerations over classes of length <= L touch at most |ball(L)| words.
void check_budget(const GroupContext& ctx, int length, std::uint64_t budget) {
  if (ball_size(ctx, length) > budget) {
    throw Error(ErrorKind::budget_exceeded,
                fmt::format("length {} needs {} elements, over the budget of {}", length,
                            ball_size(ctx, length), budget));
  }
}

// Either a file under out_dir or stdout.
class Sink {
 public:
  Sink(const std::string& out, const std::filesystem::path& out_dir) {
    if (out.empty()) return;
    const std::filesystem::path path = out_dir.empty() ? std::filesystem::path(out) : out_dir / out;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
    if (!*file_) throw Error(ErrorKind::invalid_input, fmt::format("cannot write {}", path.string()));
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

void cmd_ell(const Config& config, const Task& task, std::ostream& out) {
  const int L = length_or(task, 4);
  check_budget(config.context(), L, task.budget);
  std::vector<NamedProvider> chosen;
  if (task.providers.empty()) {
    chosen = config.providers();
  } else {
    for (const auto& name : task.providers) chosen.push_back({name, "", config.provider(name)});
  }
  out << "class,provider,ell,method,residual\n";
  for (const CyclicWord& c : classes_up_to(config.context(), L)) {
    for (const auto& p : chosen) {
      const LengthValue v = p.provider->length(c);
      out << fmt::format("{},{},{},{},{:.6e}\n", c.str(), p.name, num(v.value),
                         v.exact ? "exact" : "fekete", v.residual);
    }
  }
}

void write_dilation_rows(const DilationEstimate& e, std::ostream& out) {
  out << "length,dil,witness,method,residual\n";
  for (std::size_t i = 0; i < e.per_length.size(); ++i) {
    // Distance still to cover before the final running maximum.
    const double gap = std::isinf(e.value) ? 0.0 : e.value - e.per_length[i];
    out << fmt::format("{},{},{},enumeration,{:.6e}\n", i + 1, num(e.per_length[i]),
                       i + 1 == e.per_length.size() ? witness_str(e.witness) : "", gap);
  }
}

void cmd_dil(const Config& config, const Task& task, std::ostream& out) {
  const auto [l1, l2] = pair_of(config, task);
  const int L = length_or(task, 10);
  check_budget(config.context(), L, task.budget);
  write_dilation_rows(dilation_estimate(*l1, *l2, L), out);
}

void cmd_delta(const Config& config, const Task& task, std::ostream& out) {
  const auto [l1, l2] = pair_of(config, task);
  const int L = length_or(task, 10);
  check_budget(config.context(), L, task.budget);
  const auto fwd = dilation_estimate(*l1, *l2, L);
  const auto bwd = dilation_estimate(*l2, *l1, L);
  if (fwd.infinite() || bwd.infinite()) {
    throw Error(ErrorKind::boundary_pair, fmt::format("{} is at infinite distance", task.pair));
  }
  const std::size_t n = fwd.per_length.size();
  // Change of the log-product over the last enumerated length.
  const double residual =
      n < 2 ? 0.0
            : std::log(fwd.per_length[n - 1] * bwd.per_length[n - 1]) -
                  std::log(fwd.per_length[n - 2] * bwd.per_length[n - 2]);
  out << "pair,dil_forward,dil_backward,delta,method,residual\n";
  out << fmt::format("\"{}\",{},{},{},enumeration,{:.6e}\n", task.pair, num(fwd.value), num(bwd.value),
                     num(std::log(fwd.value * bwd.value)), residual);
}

void cmd_theta(const Config& config, const Task& task, std::ostream& out) {
  const auto [p_star, p] = pair_of(config, task);
  const CurveMethod method = parse_curve_method(task.method);
  const int radius = task.radius > 0 ? static_cast<int>(task.radius) : 12;
  if (method == CurveMethod::empirical && p->basis_lower_ratio() > 0) {
    check_budget(config.context(), static_cast<int>(radius / p->basis_lower_ratio()), task.budget);
  }
  const auto grid = parse_grid(task.grid.empty() ? "-2:4:0.1" : task.grid);
  const auto curve = build_curve(*p_star, *p, grid, method, radius);
  write_curve_csv(curve, out);
  for (const auto& note : curve.validation.notes) std::cerr << "note: " << note << '\n';
}

void cmd_geodesic(const Config& config, const Task& task, std::ostream& out) {
  const auto [d_star, d] = pair_of(config, task);
  const int L = length_or(task, 12);
  check_budget(config.context(), L, task.budget);
  const ManhattanGeodesic geo(d, d_star, L);
  write_geodesic_csv(geo, parse_grid(task.grid.empty() ? "-1:1:0.25" : task.grid), out);
}

void cmd_boundary(const Config& config, const Task& task, std::ostream& out) {
  const auto [d_star, d] = pair_of(config, task);
  const int L = length_or(task, 10);
  check_budget(config.context(), L, task.budget);
  const auto fwd = dilation_estimate(*d, *d_star, L);
  const auto bwd = dilation_estimate(*d_star, *d, L);
  if (fwd.infinite() || bwd.infinite()) {
    throw Error(ErrorKind::boundary_pair, fmt::format("{} has an infinite dilation", task.pair));
  }
  const BoundaryPair limits = boundary_limits(d, d_star, fwd.value, bwd.value, L);
  out << "class,ell_inf,ell_minus_inf,method,residual\n";
  for (const CyclicWord& c : classes_up_to(config.context(), std::min(task.table_length, L))) {
    const LengthValue a = limits.ell_inf->length(c);
    const LengthValue b = limits.ell_minus_inf->length(c);
    out << fmt::format("{},{},{},{},{:.6e}\n", c.str(), num(a.value), num(b.value),
                       a.exact && b.exact ? "exact" : "fekete", std::max(a.residual, b.residual));
  }
}

void cmd_transversal(const Config& config, const Task& task, std::ostream& out) {
  const auto [inf, minus] = pair_of(config, task);
  const int L = length_or(task, 10);
  check_budget(config.context(), L, task.budget);
  const auto r = transversality_check(inf, minus, L);
  out << "quantity,value,witness,method,residual\n";
  out << fmt::format("positivity,{},{},enumeration,0\n", num(r.positivity), witness_str(r.positivity_witness));
  out << fmt::format("dil_d_dstar,{},{},enumeration,0\n", num(r.dil_d_dstar.value), witness_str(r.dil_d_dstar.witness));
  out << fmt::format("dil_dstar_d,{},{},enumeration,0\n", num(r.dil_dstar_d.value), witness_str(r.dil_dstar_d.witness));
  out << fmt::format("recovery_defect,{},,enumeration,0\n", num(r.recovery_defect));
  out << fmt::format("transverse,{},,enumeration,0\n", r.transverse ? 1 : 0);
  for (const auto& note : r.notes) std::cerr << "note: " << note << '\n';
}

json automaton_report(const StronglyMarkovStructure& s, int radius, std::uint64_t budget,
                      const std::vector<std::string>& words, int search_radius) {
  json report;
  const auto bij = validate_bijection(s, radius, budget);
  report["bijection"] = {{"passed", bij.passed}, {"radius", bij.radius},
                         {"path_counts", bij.path_counts}, {"failure", bij.failure},
                         {"counterexample", bij.counterexample_word}};
  const auto comps = component_analysis(s);
  json cj = json::array();
  for (const auto& c : comps) {
    cj.push_back({{"id", c.id}, {"vertices", c.vertices}, {"spectral_radius", c.spectral_radius},
                  {"residual", c.residual}, {"maximal", c.maximal},
                  {"method", "power_iteration"}});
  }
  report["components"] = cj;
  report["growth"] = structure_growth(comps);
  json wj = json::array();
  for (const auto& text : words) {
    const auto a = axial_witness(s, parse_word(s.context(), text), search_radius, 8);
    wj.push_back({{"x", a.x.str()}, {"gamma", a.gamma.str()}, {"s1", a.s1.str()}, {"r", a.r.str()},
                  {"s2", a.s2.str()}, {"w", a.w.str()}, {"component", a.component},
                  {"displacement", a.displacement}, {"displacement_bound", a.displacement_bound},
                  {"axiality", a.axiality}, {"axiality_bound", a.axiality_bound},
                  {"check_power", a.check_power}});
  }
  report["axial_witnesses"] = wj;
  return report;
}

void cmd_automaton(const Config& config, const Task& task, std::ostream& out) {
  const auto s = task.structure.empty()
                     ? shortlex_structure(config.context())
                     : load_structure(std::filesystem::path(task.structure).is_absolute()
                                          ? std::filesystem::path(task.structure)
                                          : config.base_dir() / task.structure);
  const int radius = task.radius > 0 ? static_cast<int>(task.radius) : 8;
  const std::vector<std::string> words =
      task.words.empty() ? std::vector<std::string>{"ab", "aab", "abAB"} : task.words;
  out << automaton_report(s, radius, task.budget, words, 2).dump(2) << '\n';
}

}  // namespace

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::non_convergence:
    case ErrorKind::bracket_failure:
    case ErrorKind::witness_not_found:
    case ErrorKind::negative_length:
      return 3;
    case ErrorKind::degenerate_pair:
      return 4;
    case ErrorKind::budget_exceeded:
      return 5;
    default:
      return 2;
  }
}

Task task_from_json(const json& spec) {
  try {
    Task t;
    t.command = spec.at("command").get<std::string>();
    t.pair = spec.value("pair", t.pair);
    t.grid = spec.value("grid", t.grid);
    t.method = spec.value("method", t.method);
    t.max_length = spec.value("max_length", t.max_length);
    t.radius = spec.value("radius", t.radius);
    t.budget = spec.value("budget", t.budget);
    t.out = spec.value("out", t.out);
    t.suite = spec.value("suite", t.suite);
    t.structure = spec.value("structure", t.structure);
    t.providers = spec.value("providers", t.providers);
    t.words = spec.value("words", t.words);
    t.table_length = spec.value("table_length", t.table_length);
    return t;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse_error, fmt::format("malformed task: {}", e.what()));
  }
}

int run_task(const Config& config, const Task& task, const std::filesystem::path& out_dir) {
  if (task.command == "verify") {
    return run_verify(config, task.suite, task.out.empty() ? out_dir / "verify" : out_dir / task.out);
  }
  using Fn = void (*)(const Config&, const Task&, std::ostream&);
  static const std::pair<const char*, Fn> table[] = {
      {"ell", cmd_ell},           {"dil", cmd_dil},           {"delta", cmd_delta},
      {"theta", cmd_theta},       {"geodesic", cmd_geodesic}, {"boundary", cmd_boundary},
      {"transversal", cmd_transversal}, {"automaton", cmd_automaton},
  };
  for (const auto& [name, fn] : table) {
    if (task.command == name) {
      Sink sink(task.out, out_dir);
      fn(config, task, sink.stream());
      return 0;
    }
  }
  throw Error(ErrorKind::invalid_input, fmt::format("unknown command '{}'", task.command));
}

int run_all(const Config& config, const std::filesystem::path& out_dir) {
  int worst = 0;
  for (const json& spec : config.tasks()) {
    const int code = run_task(config, task_from_json(spec), out_dir);
    worst = std::max(worst, code);
  }
  return worst;
}

}  // namespace mstruct::cli
