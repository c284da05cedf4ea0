#pragma once

#include "caim/eval_harness.hpp"

#include <filesystem>
#include <iosfwd>
#include <vector>

namespace caim {

/// Fully resolved run configuration shared by every subcommand.
struct RunConfig {
  ExperimentSpec experiment;
  /// Estimator used by solve.
  Method method = Method::caim;
  std::filesystem::path out = "out";
  /// Snapshot directory read by build-qubo and solve.
  std::filesystem::path input = "out";
  bool verify_brute_force = false;
  bool export_qubo = false;
  std::vector<double> gamma_grid{0.5, 1.0, 2.0};
  std::vector<double> mu_grid{0.0, 0.5, 1.0, 2.0, 4.0};
  /// Trials per point in the (gamma, mu) sweep.
  int sweep_trials = 50;

  void validate() const;
};

/// Each command returns a process exit code; invalid input throws.
int cmd_simulate(const RunConfig& config, std::ostream& log);
int cmd_build_qubo(const RunConfig& config, std::ostream& log);
int cmd_solve(const RunConfig& config, std::ostream& log);
int cmd_evaluate(const RunConfig& config, std::ostream& log);
int cmd_sweep(const RunConfig& config, std::ostream& log);

/// Scene written by simulate: the configured template, all APs, with the
/// bearing drawn from the seed when random_bearing is set.
Scene simulation_scene(const RunConfig& config, const SteeringGrid& grid);

}  // namespace caim
