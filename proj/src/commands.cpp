#include "caim/commands.hpp"

#include "caim/io.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace caim {

void RunConfig::validate() const {
  experiment.validate();
  if (gamma_grid.empty() || mu_grid.empty()) {
    throw std::invalid_argument("config: gamma_grid and mu_grid must be nonempty");
  }
  for (double g : gamma_grid) {
    if (!(g > 0.0)) throw std::invalid_argument("config: gamma_grid values must be > 0");
  }
  for (double m : mu_grid) {
    if (!(m >= 0.0)) throw std::invalid_argument("config: mu_grid values must be >= 0");
  }
  if (sweep_trials < 1) throw std::invalid_argument("config: sweep_trials must be >= 1");
}

Scene simulation_scene(const RunConfig& config, const SteeringGrid& grid) {
  const auto& tmpl = config.experiment.scene;
  double bearing = tmpl.source_bearing_deg;
  std::seed_seq seq{static_cast<std::uint32_t>(config.experiment.seed),
                    static_cast<std::uint32_t>(config.experiment.seed >> 32), 0x51u};
  std::mt19937_64 rng(seq);
  const std::uint64_t scene_seed = rng();
  if (tmpl.random_bearing) {
    const auto steps = static_cast<long long>(std::llround(360.0 / grid.resolution()));
    bearing = std::uniform_int_distribution<long long>(0, steps - 1)(rng) * grid.resolution();
  }
  return tmpl.instantiate(scene_seed, bearing, static_cast<int>(tmpl.orientations.size()));
}

int cmd_simulate(const RunConfig& config, std::ostream& log) {
  config.validate();
  const SteeringGrid grid = config.experiment.grid.build();
  const Scene scene = simulation_scene(config, grid);
  const auto snapshots = synthesize(scene, grid);
  write_snapshots(config.out, snapshots, grid, scene.snr_db, scene.on_grid);
  log << "wrote " << snapshots.size() << " snapshots to " << config.out.string() << "\n";
  return 0;
}

int cmd_build_qubo(const RunConfig& config, std::ostream& log) {
  config.validate();
  const SnapshotSet set = read_snapshots(config.input);
  const auto referenced = reference_phase(set.snapshots, set.grid, config.experiment.phase);
  const auto orientations = set.orientations();
  const QuboProblem problem = build_qubo(referenced, set.grid, orientations,
                                         config.experiment.gamma, config.experiment.mu);
  std::ostringstream text;
  write_qubo(text, problem);
  write_text_file(config.out / "qubo.txt", text.str());
  log << "wrote QUBO with K = " << problem.size() << " to " << (config.out / "qubo.txt").string()
      << "\n";
  return 0;
}

namespace {

// Returns false when the annealer missed the exhaustive minimum.
bool verify_optimal(const QuboProblem& problem, const SolveResult& solved, std::ostream& log,
                    const std::string& what) {
  constexpr int kVerifyLimit = 20;
  if (problem.size() > kVerifyLimit) {
    throw std::invalid_argument("--verify-brute-force needs K <= 20, " + what + " has K = " +
                                std::to_string(problem.size()));
  }
  const ExactSolution exact = brute_force(problem);
  const bool ok = solved.best_energy <= exact.energy + 1e-9 * (1.0 + std::abs(exact.energy));
  log << what << ": anneal " << format_double(solved.best_energy) << ", exhaustive "
      << format_double(exact.energy) << (ok ? " (optimal)" : " (SUBOPTIMAL)") << "\n";
  return ok;
}

}  // namespace

int cmd_solve(const RunConfig& config, std::ostream& log) {
  config.validate();
  const SnapshotSet set = read_snapshots(config.input);
  const auto& spec = config.experiment;
  const auto orientations = set.orientations();
  AnnealConfig anneal_cfg = spec.anneal;
  anneal_cfg.record_trace = true;

  std::vector<ApEstimate> estimates;
  std::vector<TracePoint> trace;
  bool optimal = true;

  if (config.method == Method::l1) {
    if (config.verify_brute_force) {
      throw std::invalid_argument("--verify-brute-force applies to the annealing methods only");
    }
    estimates = estimate_l1(set.snapshots, set.grid, spec.l1);
  } else {
    const auto referenced = reference_phase(set.snapshots, set.grid, spec.phase);
    if (config.method == Method::caim) {
      const QuboProblem problem =
          build_qubo(referenced, set.grid, orientations, spec.gamma, spec.mu);
      const SolveResult solved = anneal(problem, anneal_cfg);
      if (config.verify_brute_force) optimal = verify_optimal(problem, solved, log, "joint QUBO");
      estimates = decode_caim(solved.best_state, problem, referenced, set.grid);
      trace = solved.energy_trace;
      if (config.export_qubo) {
        std::ostringstream text;
        write_qubo(text, problem);
        write_text_file(config.out / "qubo.txt", text.str());
      }
    } else {
      // Same per-AP seeding as estimate_aim.
      long long sweep_base = 0;
      for (std::size_t p = 0; p < referenced.size(); ++p) {
        const std::vector<Snapshot> single{referenced[p]};
        const QuboProblem problem = build_qubo(single, set.grid,
                                               std::span<const double>(&orientations[p], 1),
                                               spec.gamma, 0.0);
        AnnealConfig cfg = anneal_cfg;
        cfg.seed = anneal_cfg.seed + 0x9e3779b97f4a7c15ull * (p + 1);
        const SolveResult solved = anneal(problem, cfg);
        if (config.verify_brute_force) {
          optimal &= verify_optimal(problem, solved, log, "AP " + std::to_string(p + 1));
        }
        estimates.push_back(decode_caim(solved.best_state, problem, single, set.grid).front());
        for (auto point : solved.energy_trace) {
          point.sweep += sweep_base;
          trace.push_back(point);
        }
        sweep_base += static_cast<long long>(cfg.sweeps) * cfg.restarts;
      }
    }
  }

  write_text_file(config.out / "estimates.json",
                  estimates_to_json(estimates, method_label(config.method)).dump(2) + "\n");
  std::ostringstream csv;
  write_trace_csv(csv, trace);
  write_text_file(config.out / "trace.csv", csv.str());
  for (std::size_t p = 0; p < estimates.size(); ++p) {
    log << "AP " << p + 1 << ": ";
    if (estimates[p].los_bin) {
      log << "LoS " << format_double(estimates[p].los_angle_deg) << " deg, truth "
          << format_double(set.snapshots[p].los_angle_deg()) << " deg\n";
    } else {
      log << "empty support\n";
    }
  }
  return optimal ? 0 : 3;
}

int cmd_evaluate(const RunConfig& config, std::ostream& log) {
  config.validate();
  const MetricsReport report = run_experiment(config.experiment);
  write_report(report, config.out);
  for (const auto& mm : report.methods) {
    log << method_label(mm.method) << ": average median " << format_double(mm.average_median)
        << " deg, average mean " << format_double(mm.average_mean) << " deg\n";
  }
  return 0;
}

int cmd_sweep(const RunConfig& config, std::ostream& log) {
  config.validate();
  ExperimentSpec spec = config.experiment;
  spec.trials = config.sweep_trials;
  std::vector<std::pair<double, double>> points;
  for (double g : config.gamma_grid) {
    for (double m : config.mu_grid) points.emplace_back(g, m);
  }
  const auto rows = parameter_sweep(spec, points);
  write_text_file(config.out / "param_sweep.csv", parameter_sweep_csv(spec, rows));
  log << "wrote " << rows.size() << " parameter points to "
      << (config.out / "param_sweep.csv").string() << "\n";
  return 0;
}

}  // namespace caim
