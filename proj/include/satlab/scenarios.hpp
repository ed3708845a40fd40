#pragma once

#include <map>
#include <string>
#include <vector>

#include "satlab/config.hpp"
#include "satlab/grid.hpp"
#include "satlab/spectral.hpp"

// Scenario runner binding all modules: named experiment configurations,
// execution with CSV artifacts and a verdict summary, and the exit-code
// contract used by the CLI (0 pass, 1 verdict failure, 2 config error,
// 3 solver failure).

namespace satlab {

struct Scenario {
  std::string name;
  ManifoldSpec manifold;
  SpectralMode mode = SpectralMode::Robin;
  std::vector<std::string> checks;
  SolveOptions solver;
  unsigned seed = 1;
  Config raw;  // full parsed config for check-specific knobs

  static Scenario from_config(const Config& cfg);
  static Scenario from_text(const std::string& text);
};

struct Verdict {
  std::string check;
  std::string detail;
  bool pass = false;
};

struct ScenarioResult {
  std::string name;
  std::vector<Verdict> verdicts;
  std::vector<std::string> artifacts;  // file paths written
  bool all_pass() const {
    for (const auto& v : verdicts) {
      if (!v.pass) return false;
    }
    return true;
  }
};

// Runs all requested checks, writing per-check CSVs and a summary.txt under
// out_dir. resolution_override > 0 rescales node counts (periodic axes get
// the value, interval axes the value + 1).
ScenarioResult run_scenario(const Scenario& sc, const std::string& out_dir,
                            int resolution_override = 0);

// bundled scenarios
std::vector<std::string> list_scenarios();
bool has_scenario(const std::string& name);
std::string scenario_text(const std::string& name);
std::string describe_scenario(const std::string& name);
std::string nearest_scenario(const std::string& name);

// exit-code contract
constexpr int kExitPass = 0;
constexpr int kExitVerdictFailure = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitSolverFailure = 3;

// full CLI-style execution: resolves name-or-path, runs, writes artifacts,
// returns the exit code and a human-readable log
int run_scenario_file(const std::string& name_or_path,
                      const std::string& out_dir, int resolution_override,
                      long seed_override, std::string* log);

}  // namespace satlab
