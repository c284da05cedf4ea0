#pragma once

#include "caim/qubo.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace caim {

enum class AnnealMode { sequential, parallel_trial };

std::string to_string(AnnealMode mode);
AnnealMode parse_anneal_mode(const std::string& text);

/// Geometric annealing schedule from t_initial down to t_final.
///
/// sequential: one sweep visits all K bits in a fresh random order and applies
/// the Metropolis rule to each.
/// parallel_trial: one sweep is K steps; every step tests all K flips at once
/// against (dE_i - E_off), flips one accepted bit chosen uniformly, and raises
/// E_off by offset_increment whenever no flip was accepted.
struct AnnealConfig {
  int sweeps = 2000;
  double t_initial = 10.0;
  double t_final = 0.05;
  int restarts = 8;
  AnnealMode mode = AnnealMode::sequential;
  double offset_increment = 0.5;
  std::uint64_t seed = 1;
  bool record_trace = true;
  /// Finish each restart with polish_state().
  bool polish = true;

  void validate() const;
};

struct TracePoint {
  long long sweep = 0;
  double current_energy = 0.0;
  double best_energy = 0.0;
};

struct SolveResult {
  BinaryState best_state;
  double best_energy = 0.0;
  /// One point per sweep across all restarts; sweep numbers continue across restarts.
  std::vector<TracePoint> energy_trace;
  int restart_index = 0;
  long long flips_accepted = 0;
};

/// l_i = b_i + 2 * sum_j W_ij x_j.
Eigen::VectorXd local_fields(const QuboProblem& problem, const BinaryState& state);

/// State plus incrementally maintained local fields and energy.
/// Flipping bit i changes the energy by -(1 - 2 x_i) * l_i.
class FieldTracker {
 public:
  FieldTracker(const QuboProblem& problem, BinaryState state);

  double delta(int i) const { return state_[i] ? fields_(i) : -fields_(i); }
  void flip(int i);

  const BinaryState& state() const { return state_; }
  const Eigen::VectorXd& fields() const { return fields_; }
  double energy() const { return energy_; }
  /// Largest absolute difference between the maintained and recomputed fields.
  double field_drift() const;

 private:
  const QuboProblem* problem_;
  BinaryState state_;
  Eigen::VectorXd fields_;
  double energy_;
};

/// Deterministic descent to a local minimum under two move types: single
/// flips, and shifting a selected bit to the adjacent bin of its AP together
/// with every selected bit aligned to it in the other APs. A move is taken
/// only when it lowers the energy. Returns the number of moves made.
int polish_state(const QuboProblem& problem, FieldTracker& tracker);

/// Simulated annealing; with config.polish, each restart ends with
/// polish_state() and its last trace point reflects the polished state.
SolveResult anneal(const QuboProblem& problem, const AnnealConfig& config);

struct ExactSolution {
  BinaryState state;
  double energy = 0.0;
};

inline constexpr int kBruteForceMaxSize = 26;

/// Exhaustive minimum over all 2^K states (Gray-code order). Ties go to the
/// state with the smallest integer value sum_i x_i 2^i.
ExactSolution brute_force(const QuboProblem& problem);

}  // namespace caim
