#pragma once

#include "caim/estimator.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace caim {

enum class Method { caim, aim, l1 };

std::string to_string(Method method);
/// Human-readable label used in reports; the l1 baseline is marked simplified.
std::string method_label(Method method);
Method parse_method(const std::string& text);

struct GridSpec {
  ArrayGeometry geometry;
  int num_bins = 720;
  double theta_min = -90.0;
  double theta_max = 90.0;

  SteeringGrid build() const { return build_grid(geometry, num_bins, theta_min, theta_max); }
};

/// Scene family sampled once per trial. With random_bearing, each trial draws
/// the global source bearing uniformly over grid-aligned angles in [0, 360).
struct SceneTemplate {
  std::vector<double> orientations{120.0, 225.0, 200.0, 150.0, 230.0};
  int num_paths = 16;
  double snr_db = 0.0;
  bool on_grid = true;
  double reflection_decay = 0.5;
  bool random_bearing = true;
  double source_bearing_deg = 0.0;

  Scene instantiate(std::uint64_t seed, double bearing_deg, int num_aps) const;
};

struct ExperimentSpec {
  GridSpec grid;
  SceneTemplate scene;
  int trials = 200;
  std::vector<Method> methods{Method::caim, Method::aim, Method::l1};
  double gamma = 1.0;
  double mu = 1.0;
  AnnealConfig anneal{500, 10.0, 0.05, 2, AnnealMode::sequential, 0.5, 1, false};
  L1Config l1;
  PhaseReference phase = PhaseReference::peak;
  /// AP counts for the error-versus-P table; empty disables it.
  std::vector<int> sweep_p;
  std::uint64_t seed = 1;
  /// 0 selects the number of hardware threads.
  int workers = 0;

  void validate() const;
};

struct ApMetrics {
  /// LoS angle error per trial, degrees, circular on the grid span.
  std::vector<double> errors;
  /// Error of the closest detected bin (transparency metric).
  std::vector<double> best_bin_errors;
  int empty_count = 0;
  /// (error_deg, cdf) at each distinct error value.
  std::vector<std::pair<double, double>> ecdf;
  double median = 0.0;
  double mean = 0.0;
  double std_error = 0.0;
};

struct MethodMetrics {
  Method method = Method::caim;
  std::vector<ApMetrics> aps;
  double average_median = 0.0;
  double average_mean = 0.0;
};

/// Error of the first AP versus number of APs (the first P orientations are used).
struct SweepRow {
  int num_aps = 0;
  Method method = Method::caim;
  double mean_error = 0.0;
  double std_error = 0.0;
  double median_error = 0.0;
};

struct MetricsReport {
  ExperimentSpec spec;
  std::vector<MethodMetrics> methods;
  std::vector<SweepRow> sweep;
  /// Smallest achievable error: 0 on-grid, Delta/2 off-grid.
  double error_floor = 0.0;

  const MethodMetrics& metrics(Method method) const;
};

/// Empirical CDF sampled at each distinct value: right-continuous, ends at 1.
std::vector<std::pair<double, double>> ecdf(std::vector<double> samples);
double median(std::vector<double> samples);

/// LoS error for one AP; empty supports score half the grid span.
double los_error(const ApEstimate& estimate, double truth_deg, const SteeringGrid& grid);

MetricsReport run_experiment(const ExperimentSpec& spec);

nlohmann::json spec_to_json(const ExperimentSpec& spec);
nlohmann::json report_to_json(const MetricsReport& report);

/// Writes ecdf_<method>_ap<k>.csv, medians.csv, sweep_p.csv and summary.json.
void write_report(const MetricsReport& report, const std::filesystem::path& dir);

struct ParameterPoint {
  double gamma = 1.0;
  double mu = 1.0;
  /// Average over APs of the median LoS error, in the order of ExperimentSpec::methods.
  std::vector<double> average_median;
  std::vector<double> average_mean;
};

std::vector<ParameterPoint> parameter_sweep(const ExperimentSpec& spec,
                                            const std::vector<std::pair<double, double>>& points);

/// CSV: gamma,mu,method,average_median_deg,average_mean_deg
std::string parameter_sweep_csv(const ExperimentSpec& spec,
                                const std::vector<ParameterPoint>& points);

}  // namespace caim
