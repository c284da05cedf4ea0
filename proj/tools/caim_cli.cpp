// Command-line front end: simulate | build-qubo | solve | evaluate | sweep.
//
// Every option can also be set in the configuration file given by --config
// (one `key = value` per line, key = long option name without the dashes,
// e.g. `num-bins = 720`). Flags on the command line override the file.

#include "caim/commands.hpp"
#include "caim/io.hpp"

#include <iostream>
#include <sstream>
#include <string>
#include <thread>

#include "CLI11.hpp"

namespace {

struct CliState {
  caim::RunConfig config;
  std::string method = "caim";
  std::vector<std::string> methods{"caim", "aim", "l1"};
  std::string anneal_mode = "sequential";
  std::string phase = "peak";
  std::string out = "out";
  std::string input = "out";
  std::string snr = "0";
};

void add_options(CLI::App& app, CliState& s) {
  auto& c = s.config;
  auto& e = c.experiment;

  app.add_option("--seed", e.seed, "Master RNG seed")->capture_default_str();
  app.add_option("--out", s.out, "Output directory")->capture_default_str();
  app.add_option("--input", s.input, "Snapshot directory for build-qubo/solve")
      ->capture_default_str();
  app.add_option("--method", s.method, "Estimator for solve")
      ->check(CLI::IsMember({"caim", "aim", "l1"}))
      ->capture_default_str();
  app.add_flag("--verify-brute-force", c.verify_brute_force,
               "solve: check the annealed optimum by enumeration (K <= 20)");
  app.add_flag("--export-qubo", c.export_qubo, "solve: also write qubo.txt");
  app.add_option("--workers", e.workers, "Worker threads for trials (0 = all cores)")
      ->capture_default_str();

  // Array and grid.
  app.add_option("--num-elements", e.grid.geometry.num_elements, "Array elements M")
      ->capture_default_str();
  app.add_option("--spacing", e.grid.geometry.spacing_over_wavelength, "Element spacing d/lambda")
      ->capture_default_str();
  app.add_option("--num-bins", e.grid.num_bins, "Grid size N_r")->capture_default_str();
  app.add_option("--theta-min", e.grid.theta_min, "Grid start (deg)")->capture_default_str();
  app.add_option("--theta-max", e.grid.theta_max, "Grid end, exclusive (deg)")
      ->capture_default_str();

  // Scene.
  app.add_option("--orientations", e.scene.orientations, "AP orientations phi_p (deg)")
      ->delimiter(',')
      ->capture_default_str();
  app.add_option("--num-paths", e.scene.num_paths, "Paths per AP including LoS")
      ->capture_default_str();
  app.add_option("--snr-db", s.snr, "Per-element SNR against the LoS (dB, or inf)")
      ->capture_default_str();
  app.add_option("--on-grid", e.scene.on_grid, "Place the source on the grid")
      ->capture_default_str();
  app.add_option("--reflection-decay", e.scene.reflection_decay, "Reflection power ratio rho")
      ->capture_default_str();
  app.add_option("--random-bearing", e.scene.random_bearing, "Draw the source bearing per trial")
      ->capture_default_str();
  app.add_option("--source-bearing", e.scene.source_bearing_deg, "Fixed source bearing (deg)")
      ->capture_default_str();

  // Objective.
  app.add_option("--gamma", e.gamma, "Residual weight")->capture_default_str();
  app.add_option("--mu", e.mu, "Alignment penalty weight")->capture_default_str();
  app.add_option("--phase-reference", s.phase, "none | first_element | peak")
      ->check(CLI::IsMember({"none", "first_element", "peak"}))
      ->capture_default_str();

  // Annealing.
  app.add_option("--sweeps", e.anneal.sweeps, "Sweeps per restart")->capture_default_str();
  app.add_option("--t-initial", e.anneal.t_initial, "Initial temperature")->capture_default_str();
  app.add_option("--t-final", e.anneal.t_final, "Final temperature")->capture_default_str();
  app.add_option("--restarts", e.anneal.restarts, "Independent restarts")->capture_default_str();
  app.add_option("--anneal-mode", s.anneal_mode, "sequential | parallel_trial")
      ->check(CLI::IsMember({"sequential", "parallel_trial"}))
      ->capture_default_str();
  app.add_option("--offset-increment", e.anneal.offset_increment,
                 "Escape offset step (parallel_trial)")
      ->capture_default_str();
  app.add_option("--polish", e.anneal.polish, "Greedy flip/shift descent after each restart")
      ->capture_default_str();

  // l1 baseline.
  app.add_option("--l1-lambda", e.l1.lambda, "l1 weight")->capture_default_str();
  app.add_option("--l1-max-iters", e.l1.max_iters, "l1 iteration cap")->capture_default_str();
  app.add_option("--l1-tol", e.l1.tol, "l1 relative step tolerance")->capture_default_str();
  app.add_option("--l1-support-threshold", e.l1.support_threshold,
                 "Support cut as a fraction of max |s|")
      ->capture_default_str();

  // Experiments.
  app.add_option("--trials", e.trials, "Monte-Carlo trials")->capture_default_str();
  app.add_option("--methods", s.methods, "Methods to evaluate")
      ->delimiter(',')
      ->check(CLI::IsMember({"caim", "aim", "l1"}))
      ->capture_default_str();
  app.add_option("--sweep-p", e.sweep_p, "AP counts for the error-vs-P table")
      ->delimiter(',')
      ->capture_default_str();
  app.add_option("--gamma-grid", c.gamma_grid, "sweep: gamma values")
      ->delimiter(',')->capture_default_str();
  app.add_option("--mu-grid", c.mu_grid, "sweep: mu values")
      ->delimiter(',')->capture_default_str();
  app.add_option("--sweep-trials", c.sweep_trials, "sweep: trials per point")
      ->capture_default_str();
}

void resolve(CliState& s) {
  auto& c = s.config;
  c.method = caim::parse_method(s.method);
  c.experiment.methods.clear();
  for (const auto& m : s.methods) c.experiment.methods.push_back(caim::parse_method(m));
  c.experiment.anneal.mode = caim::parse_anneal_mode(s.anneal_mode);
  c.experiment.phase = caim::parse_phase_reference(s.phase);
  c.experiment.scene.snr_db =
      s.snr == "inf" ? std::numeric_limits<double>::infinity() : caim::parse_double(s.snr);
  c.out = s.out;
  c.input = s.input;
  if (c.experiment.workers == 0) {
    c.experiment.workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cooperative AoA estimation with an Ising/QUBO model"};
  app.set_config("--config", "", "Configuration file (key = value)");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);
  bool print_config = false;
  app.add_flag("--print-config", print_config, "Print the resolved configuration and exit")
      ->configurable(false);

  CliState state;
  add_options(app, state);

  using Command = int (*)(const caim::RunConfig&, std::ostream&);
  std::vector<std::pair<CLI::App*, Command>> commands{
      {app.add_subcommand("simulate", "Synthesize per-AP snapshots"), caim::cmd_simulate},
      {app.add_subcommand("build-qubo", "Write the cooperative QUBO for a snapshot set"),
       caim::cmd_build_qubo},
      {app.add_subcommand("solve", "Estimate AoAs for a snapshot set"), caim::cmd_solve},
      {app.add_subcommand("evaluate", "Run the Monte-Carlo evaluation"), caim::cmd_evaluate},
      {app.add_subcommand("sweep", "Sweep (gamma, mu) on a reduced trial budget"),
       caim::cmd_sweep},
  };
  for (auto& [sub, fn] : commands) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    resolve(state);
    if (print_config) {
      std::istringstream text(app.config_to_str(true, false));
      for (std::string line; std::getline(text, line);) {
        if (!line.ends_with("=\"{}\"")) std::cout << line << "\n";
      }
      return 0;
    }
    for (auto& [sub, fn] : commands) {
      if (sub->parsed()) return fn(state.config, std::cout);
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }
  return 1;
}
