#include "mstruct/config.hpp"

#include <fstream>
#include <set>

#include <fmt/format.h>

#include "mstruct/error.hpp"
#include "mstruct/structures.hpp"

namespace mstruct {

using nlohmann::json;

namespace {

std::vector<Word> words_of(const GroupContext& ctx, const json& list) {
  std::vector<Word> out;
  for (const json& item : list) out.push_back(parse_word(ctx, item.get<std::string>()));
  return out;
}

int generator_index(const GroupContext& ctx, const json& v) {
  int g = 0;
  if (v.is_string()) {
    const Letter l = parse_token(v.get<std::string>());
    if (l.sign() < 0) throw Error(ErrorKind::invalid_input, "letter_count expects a generator, not an inverse");
    g = l.generator();
  } else {
    g = v.get<int>();
  }
  if (g < 0 || g >= ctx.rank()) {
    throw Error(ErrorKind::invalid_input, fmt::format("generator {} outside rank {}", g, ctx.rank()));
  }
  return g;
}

class Builder {
 public:
  explicit Builder(const GroupContext& ctx) : ctx_(ctx) {}

  ProviderPtr ref(const json& spec, const char* key) const {
    const auto name = spec.at(key).get<std::string>();
    for (const auto& p : built_) {
      if (p.name == name) return p.provider;
    }
    throw Error(ErrorKind::invalid_input,
                fmt::format("provider '{}' refers to '{}', which is not defined before it",
                            spec.at("name").get<std::string>(), name));
  }

  ProviderPtr build(const json& spec) const {
    const auto name = spec.at("name").get<std::string>();
    const auto type = spec.at("type").get<std::string>();
    if (type == "letter_weight") {
      auto w = spec.at("weights").get<std::vector<double>>();
      if (w.size() != static_cast<std::size_t>(ctx_.rank())) {
        throw Error(ErrorKind::invalid_input,
                    fmt::format("'{}' needs {} weights, got {}", name, ctx_.rank(), w.size()));
      }
      return letter_weight_provider(ctx_, std::move(w), name);
    }
    if (type == "basis") return letter_weight_provider(ctx_, std::vector<double>(ctx_.rank(), 1.0), name);
    if (type == "word_metric") {
      auto gens = words_of(ctx_, spec.at("generators"));
      if (spec.value("symmetrize", true)) gens = symmetrize(std::move(gens));
      return word_metric_provider(ctx_, std::move(gens), {}, name);
    }
    if (type == "coned_off") {
      auto gens = spec.contains("generators") ? symmetrize(words_of(ctx_, spec.at("generators")))
                                              : basis_generators(ctx_);
      ConedOffOptions opt;
      opt.fattening = spec.value("fattening", opt.fattening);
      opt.jump_cap = spec.value("jump_cap", opt.jump_cap);
      if (opt.fattening < 0 || opt.jump_cap < 1) {
        throw Error(ErrorKind::invalid_input, fmt::format("'{}' has a negative fattening or jump cap", name));
      }
      return coned_off_provider(ctx_, std::move(gens), parse_word(ctx_, spec.at("subgroup").get<std::string>()),
                                opt, name);
    }
    if (type == "letter_count") return letter_count_provider(ctx_, generator_index(ctx_, spec.at("generator")), name);
    if (type == "scaled") return scaled(ref(spec, "of"), spec.at("factor").get<double>(), name);
    if (type == "linear_combination") {
      std::vector<LinearCombinationProvider::Term> terms;
      for (const json& t : spec.at("terms")) {
        terms.emplace_back(t.at(0).get<double>(), ref(json{{"name", name}, {"of", t.at(1)}}, "of"));
      }
      if (terms.empty()) throw Error(ErrorKind::invalid_input, fmt::format("'{}' has no terms", name));
      return std::make_shared<LinearCombinationProvider>(name, std::move(terms));
    }
    if (type == "boundary_difference") {
      auto p = ref(spec, "p");
      auto p_star = ref(spec, "p_star");
      const json& dil = spec.at("dil");
      const double value = dil.is_string() && dil.get<std::string>() == "auto"
                               ? dilation_estimate(*p, *p_star, spec.value("max_length", 10)).value
                               : dil.get<double>();
      return boundary_difference(std::move(p), std::move(p_star), value, name);
    }
    throw Error(ErrorKind::invalid_input, fmt::format("provider '{}' has unknown type '{}'", name, type));
  }

  void add(NamedProvider p) { built_.push_back(std::move(p)); }
  std::vector<NamedProvider> take() { return std::move(built_); }

 private:
  const GroupContext& ctx_;
  std::vector<NamedProvider> built_;
};

}  // namespace

Config::Config(GroupContext ctx, std::vector<NamedProvider> providers, json tasks,
               std::filesystem::path base_dir)
    : ctx_(ctx), providers_(std::move(providers)), tasks_(std::move(tasks)), base_dir_(std::move(base_dir)) {}

bool Config::has_provider(const std::string& name) const {
  for (const auto& p : providers_) {
    if (p.name == name) return true;
  }
  return false;
}

ProviderPtr Config::provider(const std::string& name) const {
  for (const auto& p : providers_) {
    if (p.name == name) return p.provider;
  }
  throw Error(ErrorKind::invalid_input, fmt::format("unknown provider '{}'", name));
}

Config parse_config(const json& doc, std::filesystem::path base_dir) {
  try {
    const int rank = doc.at("group").at("rank").get<int>();
    if (rank < 1 || rank > 26) throw Error(ErrorKind::invalid_input, fmt::format("rank {} out of range", rank));
    const GroupContext ctx(rank);
    Builder builder(ctx);
    std::set<std::string> seen;
    for (const json& spec : doc.at("providers")) {
      const auto name = spec.at("name").get<std::string>();
      if (!seen.insert(name).second) {
        throw Error(ErrorKind::invalid_input, fmt::format("provider name '{}' is used twice", name));
      }
      builder.add({name, spec.at("type").get<std::string>(), builder.build(spec)});
    }
    json tasks = doc.value("tasks", json::array());
    if (!tasks.is_array()) throw Error(ErrorKind::parse_error, "'tasks' must be a list");
    for (const json& t : tasks) {
      if (!t.is_object() || !t.contains("command")) throw Error(ErrorKind::parse_error, "every task needs a 'command'");
    }
    return Config(ctx, builder.take(), std::move(tasks), std::move(base_dir));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse_error, fmt::format("malformed config: {}", e.what()));
  }
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::parse_error, fmt::format("cannot open {}", path.string()));
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse_error, fmt::format("{}: {}", path.string(), e.what()));
  }
  return parse_config(doc, path.parent_path());
}

}  // namespace mstruct
