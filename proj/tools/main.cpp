#include <iostream>

#include <CLI11.hpp>

#include "cli.hpp"
#include "mstruct/error.hpp"

#ifndef MSTRUCT_DATA_DIR
#define MSTRUCT_DATA_DIR "data"
#endif

using mstruct::cli::Task;

namespace {

struct Flags {
  bool pair = false;
  bool grid = false;
  bool method = false;
  bool length = false;
  bool radius = false;
  bool out = true;
};

CLI::App* add_command(CLI::App& app, Task& task, const char* name, const char* help, Flags f) {
  CLI::App* sub = app.add_subcommand(name, help);
  sub->callback([&task, name] { task.command = name; });
  if (f.pair) sub->add_option("--pair", task.pair, "Provider names, NAME,NAME")->required();
  if (f.grid) sub->add_option("--grid", task.grid, "Parameter grid lo:hi:step");
  if (f.method) sub->add_option("--method", task.method, "exact or empirical")->check(CLI::IsMember({"exact", "empirical"}));
  if (f.length) sub->add_option("--max-length", task.max_length, "Largest cyclic length enumerated")->check(CLI::PositiveNumber);
  if (f.radius) sub->add_option("--radius", task.radius, "Ball radius")->check(CLI::PositiveNumber);
  if (f.out) sub->add_option("--out", task.out, "Output file (stdout when omitted)");
  sub->add_option("--budget", task.budget, "Largest number of group elements a task may enumerate");
  return sub;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Metric structures on free groups: translation lengths, Manhattan curves and geodesics"};
  app.require_subcommand(1);
  std::string config_path = std::string(MSTRUCT_DATA_DIR) + "/f2_core.json";
  app.add_option("--config", config_path, "JSON config")->capture_default_str();

  Task task;
  add_command(app, task, "ell", "Stable translation lengths of short classes", {.length = true})
      ->add_option("--providers", task.providers, "Providers to tabulate (default: all)")->delimiter(',');
  add_command(app, task, "dil", "Dilation Dil(first, second) by enumeration", {.pair = true, .length = true});
  add_command(app, task, "delta", "Symmetrized distance between two structures", {.pair = true, .length = true});
  add_command(app, task, "theta", "Manhattan curve CSV for --pair dStar,d",
              {.pair = true, .grid = true, .method = true, .radius = true});
  add_command(app, task, "geodesic", "Arc-length samples of the geodesic for --pair dStar,d",
              {.pair = true, .grid = true, .length = true});
  add_command(app, task, "boundary", "Boundary limits l_inf and l_-inf for --pair dStar,d",
              {.pair = true, .length = true})
      ->add_option("--table-length", task.table_length, "Largest class length in the table");
  add_command(app, task, "transversal", "Transversality check for --pair lInf,lMinusInf",
              {.pair = true, .length = true});
  CLI::App* automaton = add_command(app, task, "automaton", "Strongly Markov structure report", {.radius = true});
  automaton->add_option("--structure", task.structure, "Structure JSON (default: shortlex)");
  automaton->add_option("--word", task.words, "Elements to find axial witnesses for");
  CLI::App* verify = add_command(app, task, "verify", "Run a check battery", {});
  verify->add_option("--suite", task.suite, "Battery name")->capture_default_str();
  std::string run_dir = ".";
  CLI::App* run = app.add_subcommand("run", "Run the config's task list");
  run->add_option("--out", run_dir, "Directory for task outputs")->capture_default_str();
  run->callback([&task] { task.command = "run"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const mstruct::Config config = mstruct::load_config(config_path);
    if (task.command == "run") return mstruct::cli::run_all(config, run_dir);
    if (task.command == "verify") {
      return mstruct::cli::run_verify(config, task.suite, task.out.empty() ? "verify_out" : task.out);
    }
    return mstruct::cli::run_task(config, task);
  } catch (const mstruct::Error& e) {
    std::cerr << "error (" << mstruct::to_string(e.kind()) << "): " << e.what() << '\n';
    return mstruct::cli::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
