#include "caim/scene_sim.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace caim {

namespace {

bool all_on_grid(const std::vector<double>& orientations, const SteeringGrid& grid) {
  for (double phi : orientations) {
    if (!grid.on_grid(phi, 1e-9)) return false;
  }
  return true;
}

}  // namespace

void Scene::validate(const SteeringGrid& grid) const {
  if (aps.empty()) throw std::invalid_argument("Scene: at least one AP is required");
  for (const auto& ap : aps) {
    if (ap.num_paths < 1) throw std::invalid_argument("Scene: num_paths must be >= 1");
    if (!std::isfinite(ap.orientation_deg)) {
      throw std::invalid_argument("Scene: orientation must be finite");
    }
  }
  if (std::isnan(snr_db)) throw std::invalid_argument("Scene: snr_db is NaN");
  if (!(reflection_decay >= 0.0)) throw std::invalid_argument("Scene: reflection_decay < 0");
  if (on_grid && !all_on_grid(orientations(), grid)) {
    throw std::invalid_argument(
        "Scene: on-grid scenes need orientations that are multiples of the grid resolution");
  }
}

std::vector<double> Scene::orientations() const {
  std::vector<double> out;
  out.reserve(aps.size());
  for (const auto& ap : aps) out.push_back(ap.orientation_deg);
  return out;
}

std::vector<Snapshot> synthesize(const Scene& scene, const SteeringGrid& grid) {
  scene.validate(grid);

  std::seed_seq seq{static_cast<std::uint32_t>(scene.seed),
                    static_cast<std::uint32_t>(scene.seed >> 32), 0x5ce9eu};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double two_pi = 2.0 * std::numbers::pi;

  // Source bearing: snapped to the grid for on-grid scenes, jittered within
  // half a bin for off-grid scenes whose orientations would otherwise keep
  // every LoS on the grid.
  double bearing = scene.source_bearing_deg;
  if (scene.on_grid) {
    bearing = grid.angle(grid.bin_of(bearing));
  } else if (all_on_grid(scene.orientations(), grid)) {
    bearing += (unit(rng) - 0.5) * grid.resolution();
  }

  const double sigma2 = std::isinf(scene.snr_db) && scene.snr_db > 0
                            ? 0.0
                            : 1.0 / std::pow(10.0, scene.snr_db / 10.0);
  const double noise_scale = std::sqrt(sigma2 / 2.0);
  const int m = grid.num_elements();

  std::vector<Snapshot> out;
  out.reserve(scene.aps.size());
  for (const auto& ap : scene.aps) {
    Snapshot snap;
    snap.orientation_deg = ap.orientation_deg;
    snap.received = Eigen::VectorXcd::Zero(m);

    double los = grid.wrap_angle(bearing - ap.orientation_deg);
    if (scene.on_grid) {
      snap.los_bin = grid.bin_of(los);
      los = grid.angle(*snap.los_bin);
    }
    snap.truth.push_back({los, std::polar(1.0, two_pi * unit(rng))});

    for (int c = 1; c < ap.num_paths; ++c) {
      double angle;
      if (scene.on_grid) {
        angle = grid.angle(static_cast<int>(unit(rng) * grid.num_bins()) % grid.num_bins());
      } else {
        angle = grid.theta_min() + unit(rng) * grid.span();
      }
      const double power = std::pow(scene.reflection_decay, c);
      const double s = std::sqrt(power / 2.0);
      snap.truth.push_back({angle, Complex(s * normal(rng), s * normal(rng))});
    }

    for (const auto& path : snap.truth) {
      snap.received += steering_vector(grid.geometry(), path.angle_deg) * path.gain;
    }
    if (sigma2 > 0.0) {
      for (int e = 0; e < m; ++e) {
        snap.received(e) += Complex(noise_scale * normal(rng), noise_scale * normal(rng));
      }
    }
    out.push_back(std::move(snap));
  }
  return out;
}

std::vector<AlignmentCheck> ground_truth_alignment(const std::vector<Snapshot>& snapshots,
                                                   const SteeringGrid& grid) {
  std::vector<AlignmentCheck> out;
  for (const auto& s : snapshots) {
    if (!s.los_bin) throw std::logic_error("ground_truth_alignment: unavailable for off-grid scenes");
  }
  const int p_count = static_cast<int>(snapshots.size());
  for (int p = 0; p < p_count; ++p) {
    for (int q = p + 1; q < p_count; ++q) {
      AlignmentCheck c;
      c.p = p;
      c.q = q;
      c.los_bin_p = *snapshots[p].los_bin;
      c.los_bin_q = *snapshots[q].los_bin;
      c.shift =
          rotation_shift(snapshots[p].orientation_deg - snapshots[q].orientation_deg, grid);
      c.aligned = aligned_index(c.los_bin_q, c.shift) == c.los_bin_p;
      out.push_back(c);
    }
  }
  return out;
}

}  // namespace caim
