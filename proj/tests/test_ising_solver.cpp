#include "caim/ising_solver.hpp"

#include <random>

#include "doctest.h"
#include "test_support.hpp"

using namespace caim;
using caim::testing::random_dense_qubo;
using caim::testing::random_state;

namespace {

QuboProblem diagonal_problem(std::initializer_list<double> bias) {
  Eigen::VectorXd b(static_cast<int>(bias.size()));
  int i = 0;
  for (double v : bias) b(i++) = v;
  return QuboProblem::from_dense(b, Eigen::MatrixXd::Zero(b.size(), b.size()));
}

// Plain enumeration over all codes, smallest code wins ties.
ExactSolution enumerate(const QuboProblem& problem) {
  const int k = problem.size();
  ExactSolution best{BinaryState(k, 0), 0.0};
  best.energy = qubo_energy(problem, best.state);
  for (std::uint32_t code = 1; code < (1u << k); ++code) {
    BinaryState x(k);
    for (int i = 0; i < k; ++i) x[i] = (code >> i) & 1u;
    const double e = qubo_energy(problem, x);
    if (e < best.energy - 1e-12) best = {x, e};
  }
  return best;
}

}  // namespace

TEST_CASE("local fields") {
  Eigen::VectorXd b(2);
  b << 1.0, -2.0;
  Eigen::MatrixXd w(2, 2);
  w << 0.0, 0.5, 0.5, 0.0;
  const auto problem = QuboProblem::from_dense(b, w);
  const Eigen::VectorXd l0 = local_fields(problem, {0, 0});
  CHECK(l0(0) == 1.0);
  CHECK(l0(1) == -2.0);
  const Eigen::VectorXd l1 = local_fields(problem, {1, 0});
  CHECK(l1(0) == 1.0);
  CHECK(l1(1) == -1.0);
  CHECK_THROWS_AS(local_fields(problem, {1}), std::invalid_argument);
}

TEST_CASE("single-flip energy change matches recomputation") {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 20; ++t) {
    const auto problem = random_dense_qubo(rng, 12);
    FieldTracker tracker(problem, random_state(rng, 12));
    for (int step = 0; step < 200; ++step) {
      const int i = static_cast<int>(rng() % 12);
      const double before = qubo_energy(problem, tracker.state());
      BinaryState flipped = tracker.state();
      flipped[i] ^= 1;
      const double expected = qubo_energy(problem, flipped) - before;
      CHECK(tracker.delta(i) == doctest::Approx(expected).epsilon(1e-12));
      tracker.flip(i);
      CHECK(tracker.energy() == doctest::Approx(qubo_energy(problem, flipped)).epsilon(1e-12));
    }
    CHECK(tracker.field_drift() < 1e-10);
  }
}

TEST_CASE("tracker on a structured problem") {
  std::mt19937_64 rng(22);
  const auto inst = caim::testing::random_instance(rng, 3, 16, 4);
  const auto problem = build_qubo(inst.snapshots, inst.grid, inst.orientations, inst.gamma, inst.mu);
  FieldTracker tracker(problem, BinaryState(problem.size(), 0));
  for (int step = 0; step < 5000; ++step) tracker.flip(static_cast<int>(rng() % problem.size()));
  CHECK(tracker.field_drift() < 1e-9);
  CHECK(tracker.energy() == doctest::Approx(qubo_energy(problem, tracker.state())));
}

TEST_CASE("anneal on uncoupled problems") {
  AnnealConfig config;
  config.sweeps = 200;
  config.restarts = 2;
  for (AnnealMode mode : {AnnealMode::sequential, AnnealMode::parallel_trial}) {
    config.mode = mode;
    SUBCASE("all positive biases select every bit") {
      const auto r = anneal(diagonal_problem({1.0, 2.0, 3.0}), config);
      CHECK(r.best_state == BinaryState{1, 1, 1});
      CHECK(r.best_energy == -6.0);
    }
    SUBCASE("all negative biases select nothing") {
      const auto r = anneal(diagonal_problem({-1.0, -2.0, -3.0}), config);
      CHECK(r.best_state == BinaryState{0, 0, 0});
      CHECK(r.best_energy == 0.0);
    }
  }
}

TEST_CASE("brute force small cases") {
  const auto one = brute_force(diagonal_problem({1.0}));
  CHECK(one.state == BinaryState{1});
  CHECK(one.energy == -1.0);

  Eigen::VectorXd b(2);
  b << 1.0, 1.0;
  Eigen::MatrixXd w(2, 2);
  w << 0.0, 1.0, 1.0, 0.0;
  const auto two = brute_force(QuboProblem::from_dense(b, w));
  CHECK(two.state == BinaryState{1, 1});
  CHECK(two.energy == -4.0);

  SUBCASE("ties go to the lowest code") {
    const auto tie = brute_force(diagonal_problem({0.0, 0.0}));
    CHECK(tie.state == BinaryState{0, 0});
  }
  SUBCASE("refuses large problems") {
    CHECK_THROWS_AS(brute_force(diagonal_problem(std::initializer_list<double>{
                        1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1,
                        1, 1, 1})),
                    std::invalid_argument);
  }
}

TEST_CASE("brute force agrees with plain enumeration") {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 40; ++t) {
    const auto problem = random_dense_qubo(rng, 1 + t % 12);
    const auto gray = brute_force(problem);
    const auto plain = enumerate(problem);
    CHECK(gray.energy == doctest::Approx(plain.energy).epsilon(1e-12));
    CHECK(gray.state == plain.state);
  }
}

TEST_CASE("anneal is deterministic for a fixed seed") {
  std::mt19937_64 rng(24);
  const auto problem = random_dense_qubo(rng, 20);
  for (AnnealMode mode : {AnnealMode::sequential, AnnealMode::parallel_trial}) {
    AnnealConfig config;
    config.sweeps = 100;
    config.restarts = 3;
    config.mode = mode;
    config.seed = 99;
    const auto a = anneal(problem, config);
    const auto b = anneal(problem, config);
    CHECK(a.best_state == b.best_state);
    CHECK(a.best_energy == b.best_energy);
    CHECK(a.flips_accepted == b.flips_accepted);
    REQUIRE(a.energy_trace.size() == b.energy_trace.size());
    for (std::size_t i = 0; i < a.energy_trace.size(); ++i) {
      CHECK(a.energy_trace[i].current_energy == b.energy_trace[i].current_energy);
    }
  }
}

TEST_CASE("trace: best energy is non-increasing and never above current") {
  std::mt19937_64 rng(25);
  const auto problem = random_dense_qubo(rng, 16);
  for (AnnealMode mode : {AnnealMode::sequential, AnnealMode::parallel_trial}) {
    AnnealConfig config;
    config.sweeps = 150;
    config.restarts = 2;
    config.mode = mode;
    const auto r = anneal(problem, config);
    REQUIRE(r.energy_trace.size() == 300);
    for (std::size_t i = 0; i < r.energy_trace.size(); ++i) {
      const auto& tp = r.energy_trace[i];
      CHECK(tp.sweep == static_cast<long long>(i));
      CHECK(tp.best_energy <= tp.current_energy + 1e-12);
      if (i > 0) CHECK(tp.best_energy <= r.energy_trace[i - 1].best_energy);
    }
    CHECK(r.energy_trace.back().best_energy == doctest::Approx(r.best_energy));
    CHECK(r.best_energy == qubo_energy(problem, r.best_state));
  }
  AnnealConfig quiet;
  quiet.sweeps = 20;
  quiet.restarts = 1;
  quiet.record_trace = false;
  CHECK(anneal(problem, quiet).energy_trace.empty());
}

TEST_CASE("near-zero temperature is a greedy descent to a local minimum") {
  std::mt19937_64 rng(26);
  for (int t = 0; t < 10; ++t) {
    const auto problem = random_dense_qubo(rng, 14);
    AnnealConfig config;
    config.sweeps = 50;
    config.restarts = 1;
    config.t_initial = 1e-9;
    config.t_final = 1e-10;
    const auto r = anneal(problem, config);
    FieldTracker tracker(problem, r.best_state);
    for (int i = 0; i < problem.size(); ++i) CHECK(tracker.delta(i) >= -1e-12);
  }
}

TEST_CASE("anneal finds the exact optimum of small random problems") {
  std::mt19937_64 rng(27);
  for (AnnealMode mode : {AnnealMode::sequential, AnnealMode::parallel_trial}) {
    int hits = 0;
    for (int t = 0; t < 30; ++t) {
      const auto problem = random_dense_qubo(rng, 8 + t % 10);
      AnnealConfig config;
      config.mode = mode;
      config.sweeps = 500;
      config.restarts = 4;
      config.seed = 1000 + t;
      config.record_trace = false;
      const auto r = anneal(problem, config);
      hits += std::abs(r.best_energy - brute_force(problem).energy) < 1e-9;
    }
    CHECK(hits >= 28);
  }
}

TEST_CASE("anneal configuration validation") {
  AnnealConfig config;
  CHECK_NOTHROW(config.validate());
  config.sweeps = 0;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config = {};
  config.t_final = 20.0;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config = {};
  config.restarts = 0;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  CHECK(parse_anneal_mode("parallel_trial") == AnnealMode::parallel_trial);
  CHECK(to_string(AnnealMode::sequential) == "sequential");
  CHECK_THROWS_AS(parse_anneal_mode("quantum"), std::invalid_argument);
}

TEST_CASE("polish descends to a local minimum") {
  std::mt19937_64 rng(28);
  for (int t = 0; t < 10; ++t) {
    const auto inst = caim::testing::random_instance(rng, 3, 16, 4);
    const auto problem =
        build_qubo(inst.snapshots, inst.grid, inst.orientations, inst.gamma, inst.mu);
    const auto start = random_state(rng, problem.size(), 0.2);
    FieldTracker tracker(problem, start);
    const double before = tracker.energy();
    polish_state(problem, tracker);
    CHECK(tracker.energy() <= before);
    CHECK(tracker.energy() == doctest::Approx(qubo_energy(problem, tracker.state())));
    for (int i = 0; i < problem.size(); ++i) CHECK(tracker.delta(i) >= -1e-9);
    CHECK(polish_state(problem, tracker) == 0);

    FieldTracker again(problem, start);
    polish_state(problem, again);
    CHECK(again.state() == tracker.state());
  }
}

TEST_CASE("polish slides a bit to the adjacent better bin") {
  // Energy favours bin 3 over bin 2, but 2 -> 3 needs two single flips.
  Eigen::VectorXd b = Eigen::VectorXd::Constant(6, 1.0);
  b(3) = 1.1;
  Eigen::MatrixXd w = Eigen::MatrixXd::Constant(6, 6, -5.0);
  w.diagonal().setZero();
  const auto problem = QuboProblem::from_dense(b, w);
  FieldTracker tracker(problem, {0, 0, 1, 0, 0, 0});
  for (int i = 0; i < 6; ++i) CHECK(tracker.delta(i) >= 0.0);
  CHECK(polish_state(problem, tracker) == 1);
  CHECK(tracker.state() == BinaryState{0, 0, 0, 1, 0, 0});
}

TEST_CASE("polish can be disabled") {
  Eigen::VectorXd b(6);
  b << -1.0, -1.0, 1.0, 1.1, -1.0, -1.0;
  Eigen::MatrixXd w = Eigen::MatrixXd::Constant(6, 6, -5.0);
  w.diagonal().setZero();
  const auto problem = QuboProblem::from_dense(b, w);
  AnnealConfig config;
  config.sweeps = 1;
  config.restarts = 1;
  config.t_initial = config.t_final = 1e-9;
  int stuck = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    config.seed = seed;
    config.polish = true;
    CHECK(anneal(problem, config).best_state == BinaryState{0, 0, 0, 1, 0, 0});
    config.polish = false;
    stuck += anneal(problem, config).best_state == BinaryState{0, 0, 1, 0, 0, 0};
  }
  CHECK(stuck > 0);
}
