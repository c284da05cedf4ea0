#pragma once

#include "caim/array_model.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace caim {

struct ApConfig {
  double orientation_deg = 0.0;
  /// LoS plus reflections. Path 0 is the LoS path.
  int num_paths = 16;
};

/// Synthetic multipath scene standing in for a measured channel.
///
/// LoS: local angle wrap(beta - phi_p), unit magnitude, uniform phase.
/// Reflection c >= 1: uniform angle over the grid span and a circular complex
/// Gaussian gain of power reflection_decay^c (relative to the LoS).
/// Noise: i.i.d. CN(0, sigma^2) per element, sigma^2 = 1 / 10^(snr_db / 10).
struct Scene {
  std::vector<ApConfig> aps;
  double source_bearing_deg = 0.0;
  /// +inf gives a noiseless snapshot.
  double snr_db = 0.0;
  std::uint64_t seed = 1;
  bool on_grid = true;
  double reflection_decay = 0.5;

  void validate(const SteeringGrid& grid) const;
  std::vector<double> orientations() const;
};

struct PathTruth {
  double angle_deg = 0.0;
  Complex gain;
};

struct Snapshot {
  Eigen::VectorXcd received;
  /// LoS first.
  std::vector<PathTruth> truth;
  std::optional<int> los_bin;
  double orientation_deg = 0.0;

  double los_angle_deg() const { return truth.front().angle_deg; }
};

std::vector<Snapshot> synthesize(const Scene& scene, const SteeringGrid& grid);

struct AlignmentCheck {
  int p = 0;
  int q = 0;
  int los_bin_p = 0;
  int los_bin_q = 0;
  RotationShift shift;
  bool aligned = false;
};

/// LoS bin pairs for every AP pair p < q, and whether aligned_index maps
/// q's LoS bin onto p's. Throws std::logic_error on off-grid snapshots.
std::vector<AlignmentCheck> ground_truth_alignment(const std::vector<Snapshot>& snapshots,
                                                   const SteeringGrid& grid);

}  // namespace caim
