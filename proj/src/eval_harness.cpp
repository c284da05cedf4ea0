#include "caim/eval_harness.hpp"

#include "caim/io.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace caim {

using nlohmann::json;

std::string to_string(Method method) {
  switch (method) {
    case Method::caim: return "caim";
    case Method::aim: return "aim";
    case Method::l1: return "l1";
  }
  return "?";
}

std::string method_label(Method method) {
  switch (method) {
    case Method::caim: return "CAIM";
    case Method::aim: return "AIM";
    case Method::l1: return "RoArray-like (simplified)";
  }
  return "?";
}

Method parse_method(const std::string& text) {
  if (text == "caim") return Method::caim;
  if (text == "aim") return Method::aim;
  if (text == "l1") return Method::l1;
  throw std::invalid_argument("unknown method '" + text + "' (expected caim, aim or l1)");
}

Scene SceneTemplate::instantiate(std::uint64_t seed, double bearing_deg, int num_aps) const {
  Scene scene;
  for (int p = 0; p < num_aps; ++p) scene.aps.push_back({orientations.at(p), num_paths});
  scene.source_bearing_deg = bearing_deg;
  scene.snr_db = snr_db;
  scene.seed = seed;
  scene.on_grid = on_grid;
  scene.reflection_decay = reflection_decay;
  return scene;
}

void ExperimentSpec::validate() const {
  if (trials < 1) throw std::invalid_argument("experiment: trials must be >= 1");
  if (methods.empty()) throw std::invalid_argument("experiment: no methods selected");
  if (scene.orientations.empty()) throw std::invalid_argument("experiment: no AP orientations");
  if (!(gamma > 0.0)) throw std::invalid_argument("experiment: gamma must be > 0");
  if (!(mu >= 0.0)) throw std::invalid_argument("experiment: mu must be >= 0");
  if (scene.num_paths < 1) throw std::invalid_argument("experiment: num_paths must be >= 1");
  if (workers < 0) throw std::invalid_argument("experiment: workers must be >= 0");
  for (int p : sweep_p) {
    if (p < 1 || p > static_cast<int>(scene.orientations.size())) {
      throw std::invalid_argument("experiment: sweep P=" + std::to_string(p) +
                                  " outside [1, number of orientations]");
    }
  }
  anneal.validate();
  l1.validate();
  const SteeringGrid grid = this->grid.build();
  scene.instantiate(seed, scene.source_bearing_deg, static_cast<int>(scene.orientations.size()))
      .validate(grid);
}

const MethodMetrics& MetricsReport::metrics(Method method) const {
  for (const auto& m : methods) {
    if (m.method == method) return m;
  }
  throw std::out_of_range("report has no results for method " + to_string(method));
}

std::vector<std::pair<double, double>> ecdf(std::vector<double> samples) {
  std::sort(samples.begin(), samples.end());
  std::vector<std::pair<double, double>> out;
  const double n = static_cast<double>(samples.size());
  for (std::size_t k = 0; k < samples.size(); ++k) {
    if (k + 1 < samples.size() && samples[k + 1] == samples[k]) continue;
    out.emplace_back(samples[k], static_cast<double>(k + 1) / n);
  }
  return out;
}

double median(std::vector<double> samples) {
  if (samples.empty()) return 0.0;
  std::sort(samples.begin(), samples.end());
  const std::size_t n = samples.size();
  return n % 2 ? samples[n / 2] : 0.5 * (samples[n / 2 - 1] + samples[n / 2]);
}

double los_error(const ApEstimate& estimate, double truth_deg, const SteeringGrid& grid) {
  if (!estimate.los_bin) return grid.span() / 2.0;
  return grid.angular_distance(estimate.los_angle_deg, truth_deg);
}

namespace {

struct TrialOutcome {
  // [method][ap] -> (los error, best-bin error, empty)
  std::vector<std::vector<double>> errors;
  std::vector<std::vector<double>> best_bin;
  std::vector<std::vector<char>> empty;
};

std::mt19937_64 trial_rng(std::uint64_t seed, int num_aps, int trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(num_aps), static_cast<std::uint32_t>(trial)};
  return std::mt19937_64(seq);
}

TrialOutcome run_trial(const ExperimentSpec& spec, const SteeringGrid& grid, int num_aps,
                       int trial) {
  auto rng = trial_rng(spec.seed, num_aps, trial);
  const std::uint64_t scene_seed = rng();
  const std::uint64_t anneal_seed = rng();
  double bearing = spec.scene.source_bearing_deg;
  if (spec.scene.random_bearing) {
    const auto steps = static_cast<long long>(std::llround(360.0 / grid.resolution()));
    bearing = std::uniform_int_distribution<long long>(0, steps - 1)(rng) * grid.resolution();
  }
  const Scene scene = spec.scene.instantiate(scene_seed, bearing, num_aps);
  const auto snapshots = synthesize(scene, grid);
  const auto orientations = scene.orientations();

  TrialOutcome out;
  for (Method method : spec.methods) {
    std::vector<ApEstimate> estimates;
    AnnealConfig anneal = spec.anneal;
    anneal.seed = anneal_seed;
    anneal.record_trace = false;
    switch (method) {
      case Method::caim:
        estimates = estimate_caim(snapshots, grid, orientations,
                                  CaimConfig{spec.gamma, spec.mu, anneal, spec.phase})
                        .estimates;
        break;
      case Method::aim:
        estimates = estimate_aim(snapshots, grid, spec.gamma, anneal, spec.phase);
        break;
      case Method::l1:
        estimates = estimate_l1(snapshots, grid, spec.l1);
        break;
    }
    std::vector<double> err, best;
    std::vector<char> empty;
    for (int p = 0; p < num_aps; ++p) {
      const double truth = snapshots[p].los_angle_deg();
      err.push_back(los_error(estimates[p], truth, grid));
      double b = grid.span() / 2.0;
      for (double a : estimates[p].detected_angles_deg) {
        b = std::min(b, grid.angular_distance(a, truth));
      }
      best.push_back(b);
      empty.push_back(estimates[p].empty());
    }
    out.errors.push_back(std::move(err));
    out.best_bin.push_back(std::move(best));
    out.empty.push_back(std::move(empty));
  }
  return out;
}

// Trials run on a worker pool; outcomes are stored by trial index so the
// aggregation order never depends on scheduling.
std::vector<TrialOutcome> run_trials(const ExperimentSpec& spec, const SteeringGrid& grid,
                                     int num_aps) {
  std::vector<TrialOutcome> outcomes(spec.trials);
  int workers = spec.workers > 0 ? spec.workers
                                 : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min(workers, spec.trials);
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto work = [&]() {
    for (int t = next++; t < spec.trials && !failed; t = next++) {
      try {
        outcomes[t] = run_trial(spec, grid, num_aps, t);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return outcomes;
}

ApMetrics summarize(std::vector<double> errors, std::vector<double> best_bin, int empty_count) {
  ApMetrics m;
  m.errors = std::move(errors);
  m.best_bin_errors = std::move(best_bin);
  m.empty_count = empty_count;
  m.ecdf = ecdf(m.errors);
  m.median = median(m.errors);
  const double n = static_cast<double>(m.errors.size());
  m.mean = std::accumulate(m.errors.begin(), m.errors.end(), 0.0) / n;
  if (m.errors.size() > 1) {
    double ss = 0.0;
    for (double e : m.errors) ss += (e - m.mean) * (e - m.mean);
    m.std_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return m;
}

std::vector<MethodMetrics> aggregate(const ExperimentSpec& spec,
                                     const std::vector<TrialOutcome>& outcomes, int num_aps) {
  std::vector<MethodMetrics> out;
  for (std::size_t mi = 0; mi < spec.methods.size(); ++mi) {
    MethodMetrics mm;
    mm.method = spec.methods[mi];
    for (int p = 0; p < num_aps; ++p) {
      std::vector<double> err, best;
      int empty = 0;
      for (const auto& o : outcomes) {
        err.push_back(o.errors[mi][p]);
        best.push_back(o.best_bin[mi][p]);
        empty += o.empty[mi][p];
      }
      mm.aps.push_back(summarize(std::move(err), std::move(best), empty));
    }
    for (const auto& ap : mm.aps) {
      mm.average_median += ap.median / num_aps;
      mm.average_mean += ap.mean / num_aps;
    }
    out.push_back(std::move(mm));
  }
  return out;
}

}  // namespace

MetricsReport run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const SteeringGrid grid = spec.grid.build();
  const int num_aps = static_cast<int>(spec.scene.orientations.size());

  MetricsReport report;
  report.spec = spec;
  report.error_floor = spec.scene.on_grid ? 0.0 : grid.resolution() / 2.0;
  report.methods = aggregate(spec, run_trials(spec, grid, num_aps), num_aps);

  for (int p : spec.sweep_p) {
    const auto methods = p == num_aps ? report.methods
                                      : aggregate(spec, run_trials(spec, grid, p), p);
    for (const auto& mm : methods) {
      const ApMetrics& first = mm.aps.front();
      report.sweep.push_back({p, mm.method, first.mean, first.std_error, first.median});
    }
  }
  return report;
}

json spec_to_json(const ExperimentSpec& spec) {
  json methods = json::array();
  for (Method m : spec.methods) methods.push_back(to_string(m));
  return {
      {"grid",
       {{"num_elements", spec.grid.geometry.num_elements},
        {"spacing_over_wavelength", spec.grid.geometry.spacing_over_wavelength},
        {"num_bins", spec.grid.num_bins},
        {"theta_min", spec.grid.theta_min},
        {"theta_max", spec.grid.theta_max}}},
      {"scene",
       {{"orientations_deg", spec.scene.orientations},
        {"num_paths", spec.scene.num_paths},
        {"snr_db", std::isfinite(spec.scene.snr_db) ? json(spec.scene.snr_db) : json("inf")},
        {"on_grid", spec.scene.on_grid},
        {"reflection_decay", spec.scene.reflection_decay},
        {"random_bearing", spec.scene.random_bearing},
        {"source_bearing_deg", spec.scene.source_bearing_deg}}},
      {"trials", spec.trials},
      {"methods", methods},
      {"gamma", spec.gamma},
      {"mu", spec.mu},
      {"phase_reference", to_string(spec.phase)},
      {"anneal",
       {{"sweeps", spec.anneal.sweeps},
        {"t_initial", spec.anneal.t_initial},
        {"t_final", spec.anneal.t_final},
        {"restarts", spec.anneal.restarts},
        {"mode", to_string(spec.anneal.mode)},
        {"offset_increment", spec.anneal.offset_increment},
        {"polish", spec.anneal.polish}}},
      {"l1",
       {{"lambda", spec.l1.lambda},
        {"max_iters", spec.l1.max_iters},
        {"tol", spec.l1.tol},
        {"support_threshold", spec.l1.support_threshold}}},
      {"sweep_p", spec.sweep_p},
      {"seed", spec.seed}};
}

json report_to_json(const MetricsReport& report) {
  json methods = json::array();
  for (const auto& mm : report.methods) {
    json aps = json::array();
    for (std::size_t p = 0; p < mm.aps.size(); ++p) {
      const auto& a = mm.aps[p];
      aps.push_back({{"ap", p + 1},
                     {"samples", a.errors.size()},
                     {"median_deg", a.median},
                     {"mean_deg", a.mean},
                     {"std_error_deg", a.std_error},
                     {"empty_supports", a.empty_count},
                     {"best_bin_median_deg", median(a.best_bin_errors)}});
    }
    methods.push_back({{"method", to_string(mm.method)},
                       {"label", method_label(mm.method)},
                       {"average_median_deg", mm.average_median},
                       {"average_mean_deg", mm.average_mean},
                       {"aps", aps}});
  }
  json sweep = json::array();
  for (const auto& row : report.sweep) {
    sweep.push_back({{"num_aps", row.num_aps},
                     {"method", to_string(row.method)},
                     {"ap1_mean_deg", row.mean_error},
                     {"ap1_std_error_deg", row.std_error},
                     {"ap1_median_deg", row.median_error}});
  }
  return {{"format", "caim-summary"},
          {"schema_version", 1},
          {"note",
           "Synthetic multipath channel; compare methods by ordering and trend, not by "
           "absolute values."},
          {"error_floor_deg", report.error_floor},
          {"spec", spec_to_json(report.spec)},
          {"methods", methods},
          {"sweep_p", sweep}};
}

void write_report(const MetricsReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& mm : report.methods) {
    for (std::size_t p = 0; p < mm.aps.size(); ++p) {
      std::ostringstream csv;
      csv << "error_deg,cdf\n";
      for (const auto& [x, f] : mm.aps[p].ecdf) {
        csv << format_double(x) << ',' << format_double(f) << "\n";
      }
      write_text_file(dir / ("ecdf_" + to_string(mm.method) + "_ap" + std::to_string(p + 1) + ".csv"),
                      csv.str());
    }
  }

  std::ostringstream medians;
  medians << "method,ap,median_deg,mean_deg,std_error_deg,empty_supports,samples\n";
  for (const auto& mm : report.methods) {
    for (std::size_t p = 0; p < mm.aps.size(); ++p) {
      const auto& a = mm.aps[p];
      medians << to_string(mm.method) << ',' << p + 1 << ',' << format_double(a.median) << ','
              << format_double(a.mean) << ',' << format_double(a.std_error) << ','
              << a.empty_count << ',' << a.errors.size() << "\n";
    }
    medians << to_string(mm.method) << ",average," << format_double(mm.average_median) << ','
            << format_double(mm.average_mean) << ",,,\n";
  }
  write_text_file(dir / "medians.csv", medians.str());

  std::ostringstream sweep;
  sweep << "num_aps,method,ap1_mean_deg,ap1_std_error_deg,ap1_median_deg\n";
  for (const auto& row : report.sweep) {
    sweep << row.num_aps << ',' << to_string(row.method) << ',' << format_double(row.mean_error)
          << ',' << format_double(row.std_error) << ',' << format_double(row.median_error) << "\n";
  }
  write_text_file(dir / "sweep_p.csv", sweep.str());

  write_text_file(dir / "summary.json", report_to_json(report).dump(2) + "\n");
}

std::vector<ParameterPoint> parameter_sweep(const ExperimentSpec& spec,
                                            const std::vector<std::pair<double, double>>& points) {
  if (points.empty()) throw std::invalid_argument("parameter_sweep: empty parameter grid");
  std::vector<ParameterPoint> out;
  for (const auto& [gamma, mu] : points) {
    ExperimentSpec run = spec;
    run.gamma = gamma;
    run.mu = mu;
    run.sweep_p.clear();
    const MetricsReport report = run_experiment(run);
    ParameterPoint point{gamma, mu, {}, {}};
    for (const auto& mm : report.methods) {
      point.average_median.push_back(mm.average_median);
      point.average_mean.push_back(mm.average_mean);
    }
    out.push_back(std::move(point));
  }
  return out;
}

std::string parameter_sweep_csv(const ExperimentSpec& spec,
                                const std::vector<ParameterPoint>& points) {
  std::ostringstream csv;
  csv << "gamma,mu,method,average_median_deg,average_mean_deg\n";
  for (const auto& pt : points) {
    for (std::size_t m = 0; m < spec.methods.size(); ++m) {
      csv << format_double(pt.gamma) << ',' << format_double(pt.mu) << ','
          << to_string(spec.methods[m]) << ',' << format_double(pt.average_median[m]) << ','
          << format_double(pt.average_mean[m]) << "\n";
    }
  }
  return csv.str();
}

}  // namespace caim
