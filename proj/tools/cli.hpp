#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "mstruct/config.hpp"
#include "mstruct/error.hpp"

namespace mstruct::cli {

/// One unit of work, filled either from command-line flags or from a config task.
struct Task {
  std::string command;
  std::string pair;
  std::string grid;
  std::string method = "exact";
  int max_length = 0;  // 0: per-command default
  double radius = 0;   // 0: per-command default
  std::uint64_t budget = kDefaultElementBudget;
  std::string out;
  std::string suite = "core";
  std::string structure;
  std::vector<std::string> providers;
  std::vector<std::string> words;
  int table_length = 6;
};

Task task_from_json(const nlohmann::json& spec);

/// Runs one task. Artifacts go to `out` (resolved against `out_dir`) or stdout.
/// Returns the process exit code; library errors propagate as mstruct::Error.
int run_task(const Config& config, const Task& task, const std::filesystem::path& out_dir = {});

/// Runs the config's task list in order.
int run_all(const Config& config, const std::filesystem::path& out_dir);

/// The acceptance battery behind `verify`; writes artifacts and summary.txt into out_dir.
int run_verify(const Config& config, const std::string& suite, const std::filesystem::path& out_dir);

int exit_code(ErrorKind kind);

}  // namespace mstruct::cli
