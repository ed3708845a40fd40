#include <CLI11.hpp>
#include <iostream>

#include "satlab/scenarios.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "satlab - numerical laboratory for conformal satellite metrics,\n"
      "Steklov/Robin principal eigenvalues, flatzoomer functionals and\n"
      "convergence diagnostics on box-chart manifolds"};
  app.require_subcommand(1);

  std::string target;
  std::string out_dir = "out";
  int resolution = 0;
  long seed = -1;

  auto* run = app.add_subcommand("run", "run a scenario file or bundled name");
  run->add_option("scenario", target, "config file path or bundled scenario name")
      ->required();
  run->add_option("--out-dir", out_dir, "artifact output directory");
  run->add_option("--resolution-override", resolution,
                  "override node counts (periodic axes get N, interval N+1)");
  run->add_option("--seed", seed, "override the scenario seed");

  auto* list = app.add_subcommand("list", "list bundled scenarios");

  std::string desc_name;
  auto* desc = app.add_subcommand("describe", "describe a bundled scenario");
  desc->add_option("name", desc_name, "scenario name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : satlab::kExitConfigError;
  }

  if (list->parsed()) {
    for (const auto& name : satlab::list_scenarios()) {
      std::cout << name << "\n";
    }
    return satlab::kExitPass;
  }
  if (desc->parsed()) {
    if (!satlab::has_scenario(desc_name)) {
      std::cerr << "unknown scenario: " << desc_name << " (did you mean '"
                << satlab::nearest_scenario(desc_name) << "'?)\n";
      return satlab::kExitConfigError;
    }
    std::cout << desc_name << "\n  " << satlab::describe_scenario(desc_name)
              << "\n";
    return satlab::kExitPass;
  }

  std::string log;
  int code = satlab::run_scenario_file(target, out_dir, resolution, seed, &log);
  std::cout << log;
  return code;
}
