#pragma once

// JSON configuration documents: a group, named providers and a task list.
//
//   {"group": {"rank": 2},
//    "providers": [{"name": "d", "type": "letter_weight", "weights": [2, 1]}, ...],
//    "tasks": [{"command": "theta", "pair": "dStar,d", "grid": "-2:4:0.1"}, ...]}
//
// Providers may only refer to names defined earlier in the list.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "mstruct/metrics.hpp"

namespace mstruct {

struct NamedProvider {
  std::string name;
  std::string type;
  ProviderPtr provider;
};

class Config {
 public:
  Config(GroupContext ctx, std::vector<NamedProvider> providers, nlohmann::json tasks,
         std::filesystem::path base_dir);

  const GroupContext& context() const { return ctx_; }
  const std::vector<NamedProvider>& providers() const { return providers_; }
  /// Throws Error(invalid_input) for unknown names.
  ProviderPtr provider(const std::string& name) const;
  bool has_provider(const std::string& name) const;
  const nlohmann::json& tasks() const { return tasks_; }
  /// Directory of the config file; relative paths inside the config resolve against it.
  const std::filesystem::path& base_dir() const { return base_dir_; }

 private:
  GroupContext ctx_;
  std::vector<NamedProvider> providers_;
  nlohmann::json tasks_;
  std::filesystem::path base_dir_;
};

/// Throws Error(parse_error) for malformed documents and Error(invalid_input)
/// for documents that parse but violate a provider's preconditions.
Config parse_config(const nlohmann::json& doc, std::filesystem::path base_dir = {});
Config load_config(const std::filesystem::path& path);

}  // namespace mstruct
