#include "caim/eval_harness.hpp"

#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "doctest.h"

using namespace caim;

namespace {

ExperimentSpec small_spec() {
  ExperimentSpec spec;
  spec.grid.num_bins = 72;
  spec.scene.orientations = {120.0, 225.0, 200.0};
  spec.scene.num_paths = 4;
  spec.scene.snr_db = 5.0;
  spec.trials = 6;
  spec.anneal.sweeps = 100;
  spec.anneal.restarts = 1;
  spec.l1.max_iters = 100;
  spec.workers = 2;
  return spec;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("ecdf examples") {
  const auto e = ecdf({2.0, 1.0, 1.0});
  REQUIRE(e.size() == 2);
  CHECK(e[0] == std::pair{1.0, 2.0 / 3.0});
  CHECK(e[1] == std::pair{2.0, 1.0});
  CHECK(ecdf({}).empty());
}

TEST_CASE("ecdf properties") {
  std::mt19937_64 rng(51);
  std::uniform_int_distribution<int> value(0, 20);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> xs(1 + t % 30);
    for (auto& x : xs) x = value(rng) * 0.25;
    const auto e = ecdf(xs);
    CHECK(e.back().second == 1.0);
    for (std::size_t k = 0; k < e.size(); ++k) {
      const double below = std::count_if(xs.begin(), xs.end(), [&](double x) { return x <= e[k].first; });
      CHECK(e[k].second == doctest::Approx(below / xs.size()));
      if (k > 0) {
        CHECK(e[k].first > e[k - 1].first);
        CHECK(e[k].second > e[k - 1].second);
      }
    }
  }
}

TEST_CASE("median") {
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
  CHECK(median({}) == 0.0);
}

TEST_CASE("LoS error") {
  const auto grid = build_grid({8, 0.5}, 720, -90, 90);
  ApEstimate est;
  CHECK(los_error(est, 10.0, grid) == 90.0);
  est.los_bin = grid.bin_of(10.0);
  est.los_angle_deg = grid.angle(*est.los_bin);
  CHECK(los_error(est, 10.0, grid) == 0.0);
  CHECK(los_error(est, 10.25, grid) == doctest::Approx(0.25));
  est.los_angle_deg = -89.75;
  CHECK(los_error(est, 89.75, grid) == doctest::Approx(0.5));
  std::mt19937_64 rng(52);
  std::uniform_real_distribution<double> u(-90.0, 90.0);
  for (int t = 0; t < 1000; ++t) {
    est.los_angle_deg = u(rng);
    const double err = los_error(est, u(rng), grid);
    CHECK(err >= 0.0);
    CHECK(err <= 90.0);
  }
}

TEST_CASE("a noiseless single-path trial has zero error") {
  ExperimentSpec spec = small_spec();
  spec.grid.num_bins = 720;
  spec.scene.num_paths = 1;
  spec.scene.snr_db = std::numeric_limits<double>::infinity();
  spec.trials = 1;
  spec.methods = {Method::caim, Method::aim};
  spec.anneal.sweeps = 300;
  spec.anneal.restarts = 2;
  const auto report = run_experiment(spec);
  for (const auto& mm : report.methods) {
    for (const auto& ap : mm.aps) {
      REQUIRE(ap.errors.size() == 1);
      CHECK(ap.errors[0] == 0.0);
    }
    CHECK(mm.average_median == 0.0);
  }
  CHECK(report.error_floor == 0.0);
}

TEST_CASE("experiments are deterministic and independent of the worker count") {
  ExperimentSpec spec = small_spec();
  spec.sweep_p = {2, 3};
  const auto a = report_to_json(run_experiment(spec)).dump();
  spec.workers = 1;
  const auto b = report_to_json(run_experiment(spec)).dump();
  spec.workers = 5;
  const auto c = report_to_json(run_experiment(spec)).dump();
  CHECK(a == b);
  CHECK(a == c);
}

TEST_CASE("report structure") {
  ExperimentSpec spec = small_spec();
  spec.sweep_p = {1, 2, 3};
  spec.scene.on_grid = false;
  spec.scene.orientations = {120.3, 225.9, 200.1};
  const auto report = run_experiment(spec);
  CHECK(report.error_floor == doctest::Approx(report.spec.grid.build().resolution() / 2));
  REQUIRE(report.methods.size() == 3);
  for (const auto& mm : report.methods) {
    REQUIRE(mm.aps.size() == 3);
    double sum = 0.0;
    for (const auto& ap : mm.aps) {
      CHECK(ap.errors.size() == 6);
      CHECK(ap.best_bin_errors.size() == 6);
      CHECK(ap.median == median(ap.errors));
      sum += ap.median;
      for (std::size_t t = 0; t < 6; ++t) CHECK(ap.best_bin_errors[t] <= ap.errors[t]);
    }
    CHECK(mm.average_median == doctest::Approx(sum / 3));
  }
  CHECK(report.sweep.size() == 9);

  const auto dir = std::filesystem::temp_directory_path() / "caim_test_report";
  std::filesystem::remove_all(dir);
  write_report(report, dir);
  for (const char* name : {"ecdf_caim_ap1.csv", "ecdf_aim_ap3.csv", "ecdf_l1_ap2.csv",
                           "medians.csv", "sweep_p.csv", "summary.json"}) {
    CHECK(std::filesystem::exists(dir / name));
  }
  CHECK(slurp(dir / "ecdf_caim_ap1.csv").rfind("error_deg,cdf\n", 0) == 0);
  const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
  CHECK(summary.at("format") == "caim-summary");
  CHECK(summary.at("spec").at("trials") == 6);
  std::filesystem::remove_all(dir);
}

TEST_CASE("metrics lookup and validation") {
  ExperimentSpec spec = small_spec();
  spec.methods = {Method::aim};
  spec.trials = 1;
  const auto report = run_experiment(spec);
  CHECK(report.metrics(Method::aim).method == Method::aim);
  CHECK_THROWS_AS(report.metrics(Method::caim), std::out_of_range);

  spec.sweep_p = {4};
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = small_spec();
  spec.trials = 0;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = small_spec();
  spec.scene.orientations = {120.1};
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);

  CHECK(parse_method("l1") == Method::l1);
  CHECK(method_label(Method::l1) == "RoArray-like (simplified)");
  CHECK_THROWS_AS(parse_method("music"), std::invalid_argument);
}

TEST_CASE("parameter sweep reproduces single experiments") {
  ExperimentSpec spec = small_spec();
  spec.trials = 4;
  const auto points = parameter_sweep(spec, {{1.0, 0.0}, {0.5, 2.0}});
  REQUIRE(points.size() == 2);
  for (const auto& pt : points) {
    ExperimentSpec single = spec;
    single.gamma = pt.gamma;
    single.mu = pt.mu;
    const auto report = run_experiment(single);
    for (std::size_t m = 0; m < spec.methods.size(); ++m) {
      CHECK(pt.average_median[m] == report.metrics(spec.methods[m]).average_median);
      CHECK(pt.average_mean[m] == report.metrics(spec.methods[m]).average_mean);
    }
  }
  const auto csv = parameter_sweep_csv(spec, points);
  CHECK(csv.rfind("gamma,mu,method,average_median_deg,average_mean_deg\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 2 * 3);
}
