#include "caim/io.hpp"

#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "doctest.h"
#include "test_support.hpp"

using namespace caim;

namespace {

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("caim_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("doubles round-trip through text") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int t = 0; t < 1000; ++t) {
    const double v = u(rng) / (1 + t);
    CHECK(parse_double(format_double(v)) == v);
  }
  CHECK(format_double(0.5) == "0.5");
  CHECK(parse_double(format_double(std::numeric_limits<double>::denorm_min())) ==
        std::numeric_limits<double>::denorm_min());
  CHECK_THROWS_AS(parse_double("1.5x"), std::invalid_argument);
  CHECK_THROWS_AS(parse_double(""), std::invalid_argument);
}

TEST_CASE("QUBO text round-trip is bit-exact") {
  std::mt19937_64 rng(42);
  for (double mu : {0.0, 0.7}) {
    const auto inst = caim::testing::random_instance(rng, 3, 16, 4);
    const auto problem = build_qubo(inst.snapshots, inst.grid, inst.orientations, inst.gamma, mu);
    std::stringstream text;
    write_qubo(text, problem);
    const auto back = read_qubo(text);
    CHECK(back.size() == problem.size());
    CHECK(back.index().num_aps == 3);
    CHECK(back.index().num_bins == 16);
    CHECK(back.gamma() == problem.gamma());
    CHECK(back.mu() == problem.mu());
    CHECK(back.offset() == problem.offset());
    CHECK(back.bias() == problem.bias());
    CHECK(back.dense_coupling() == problem.dense_coupling());
    REQUIRE(back.shifts().size() == problem.shifts().size());
    for (std::size_t k = 0; k < back.shifts().size(); ++k) {
      CHECK(back.shifts()[k].shift.bins == problem.shifts()[k].shift.bins);
    }
    for (int t = 0; t < 20; ++t) {
      const auto x = caim::testing::random_state(rng, problem.size());
      CHECK(qubo_energy(back, x) == qubo_energy(problem, x));
    }
    std::stringstream again;
    write_qubo(again, back);
    CHECK(again.str() == text.str());
  }
}

TEST_CASE("dense QUBO round-trip") {
  std::mt19937_64 rng(43);
  const auto problem = caim::testing::random_dense_qubo(rng, 10);
  std::stringstream text;
  write_qubo(text, problem);
  const auto back = read_qubo(text);
  CHECK(back.dense_coupling() == problem.dense_coupling());
  CHECK(back.bias() == problem.bias());
}

TEST_CASE("QUBO reader rejects malformed input") {
  auto parse = [](const std::string& s) {
    std::istringstream in(s);
    return read_qubo(in);
  };
  CHECK_THROWS(parse(""));
  CHECK_THROWS(parse("# caim-qubo 2\n"));
  CHECK_THROWS(parse("# caim-qubo 1\nK 2\nP 1\nN_r 2\ngamma 1\nmu 0\noffset 0\nb 0 1\n"));
  CHECK_THROWS(parse("# caim-qubo 1\nK 2\nP 1\nN_r 2\ngamma 1\nmu 0\noffset 0\nb 0 1\nb 1 1\nW 0 5 1\n"));
  CHECK_THROWS(parse("# caim-qubo 1\nK 2\nP 1\nN_r 2\ngamma 1\nmu 0\noffset 0\nb 0 1\nb 1 1\nZ 0 1\n"));
  CHECK_NOTHROW(parse("# caim-qubo 1\nK 2\nP 1\nN_r 2\ngamma 1\nmu 0\noffset 0\nb 0 1\nb 1 1\nW 0 1 -2\n"));
}

TEST_CASE("snapshot JSON round-trip") {
  const auto grid = build_grid({8, 0.5}, 720, -90, 90);
  Scene scene;
  scene.aps = {{120.0, 4}, {225.0, 4}};
  scene.source_bearing_deg = 30.0;
  scene.snr_db = 3.0;
  scene.seed = 9;
  const auto snaps = synthesize(scene, grid);
  const auto dir = scratch_dir("snapshots");
  write_snapshots(dir, snaps, grid, scene.snr_db, true);
  CHECK(std::filesystem::exists(dir / "snapshot_ap1.json"));
  CHECK(std::filesystem::exists(dir / "snapshot_ap2.json"));
  const auto set = read_snapshots(dir);
  CHECK(set.grid.num_bins() == 720);
  CHECK(set.grid.num_elements() == 8);
  REQUIRE(set.snapshots.size() == 2);
  CHECK(set.orientations() == std::vector<double>{120.0, 225.0});
  for (int p = 0; p < 2; ++p) {
    CHECK(set.snapshots[p].received == snaps[p].received);
    CHECK(set.snapshots[p].los_bin == snaps[p].los_bin);
    REQUIRE(set.snapshots[p].truth.size() == snaps[p].truth.size());
    for (std::size_t c = 0; c < snaps[p].truth.size(); ++c) {
      CHECK(set.snapshots[p].truth[c].angle_deg == snaps[p].truth[c].angle_deg);
      CHECK(set.snapshots[p].truth[c].gain == snaps[p].truth[c].gain);
    }
  }

  SUBCASE("noiseless SNR is written as null") {
    const auto j = snapshot_to_json(snaps[0], 1, grid, std::numeric_limits<double>::infinity(), true);
    CHECK(j.at("snr_db").is_null());
  }
  SUBCASE("gaps in AP numbering are rejected") {
    std::filesystem::rename(dir / "snapshot_ap1.json", dir / "snapshot_ap3.json");
    CHECK_THROWS(read_snapshots(dir));
  }
  SUBCASE("empty directory is rejected") {
    CHECK_THROWS(read_snapshots(scratch_dir("empty")));
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("grid JSON round-trip") {
  const auto grid = build_grid({6, 0.4}, 90, -60, 60);
  const auto back = grid_from_json(grid_to_json(grid));
  CHECK(back.num_elements() == 6);
  CHECK(back.geometry().spacing_over_wavelength == 0.4);
  CHECK(back.num_bins() == 90);
  CHECK(back.theta_min() == -60.0);
  CHECK(back.theta_max() == 60.0);
}

TEST_CASE("trace CSV and estimates JSON") {
  std::ostringstream csv;
  write_trace_csv(csv, {{0, -1.5, -1.5}, {1, -1.0, -1.5}});
  CHECK(csv.str() == "sweep,current_energy,best_energy\n0,-1.5,-1.5\n1,-1,-1.5\n");

  ApEstimate est;
  est.detected_bins = {3, 7};
  est.detected_angles_deg = {-80.0, -70.0};
  est.alignment_votes = {1, 0};
  est.refit_amplitudes = {Complex(1, 0), Complex(0, 0.5)};
  est.los_bin = 3;
  est.los_angle_deg = -80.0;
  const auto j = estimates_to_json({est, ApEstimate{}}, "CAIM");
  CHECK(j.at("method") == "CAIM");
  REQUIRE(j.at("aps").size() == 2);
  CHECK(j.at("aps")[0].at("los_bin") == 3);
  CHECK(j.at("aps")[1].at("los_bin").is_null());
}
