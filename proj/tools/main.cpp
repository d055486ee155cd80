#include <CLI11.hpp>

#include <iostream>

#include "commands.hpp"
#include "kbte/errors.hpp"
#include "kbte/parallel.hpp"

int main(int argc, char** argv) {
  using namespace kbte::cli;
  CLI::App app{"Kinetic Boltzmann solver with diffuse walls and an external potential"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out;
  int snapshot_every = 0;

  for (const auto& name : command_names()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--scenario", scenario_path, "scenario YAML file")->required();
    sub->add_option("--seed", seed, "override the scenario seed");
    sub->add_option("--workers", workers, "worker threads (default: KINETIC_BTE_WORKERS or 1)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--out", out, "output directory (default: scenario output.directory)");
    sub->add_option("--snapshot-every", snapshot_every, "snapshot every K-th output time")
        ->check(CLI::NonNegativeNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  RunOptions options;
  options.seed = seed;
  options.workers = kbte::resolve_workers(workers);
  kbte::set_default_workers(options.workers);
  if (out) options.out = *out;
  options.snapshot_every = snapshot_every;

  try {
    const Scenario scenario = load_scenario(scenario_path);
    return dispatch(command, scenario, options, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
}
