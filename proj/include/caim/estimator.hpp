#pragma once

#include "caim/ising_solver.hpp"
#include "caim/qubo.hpp"

#include <optional>
#include <string>
#include <vector>

namespace caim {

/// Common-phase correction applied to each snapshot before the binary model
/// sees it. The binary indicators carry no phase, so Re{Psi^H y} only rewards
/// a path whose gain is close to real positive.
///   none:          y unchanged
///   first_element: y * conj(y_0) / |y_0|
///   peak:          y * exp(-j arg(psi_k^H y)), k = argmax_k |psi_k^H y|
enum class PhaseReference { none, first_element, peak };

std::string to_string(PhaseReference mode);
PhaseReference parse_phase_reference(const std::string& text);

std::vector<Snapshot> reference_phase(const std::vector<Snapshot>& snapshots,
                                      const SteeringGrid& grid, PhaseReference mode);

struct ApEstimate {
  std::vector<int> detected_bins;
  std::vector<double> detected_angles_deg;
  std::vector<int> alignment_votes;
  std::vector<Complex> refit_amplitudes;
  /// Absent when the support is empty.
  std::optional<int> los_bin;
  double los_angle_deg = 0.0;
  /// False when an iterative baseline stopped at max_iters.
  bool converged = true;

  bool empty() const { return detected_bins.empty(); }
};

/// Per-AP supports from a flat solution. For each detected bin, the vote is
/// the number of other APs whose support holds the aligned bin; the LoS is the
/// bin with most votes, then largest least-squares amplitude, then lowest bin.
std::vector<ApEstimate> decode_caim(const BinaryState& solution, const QuboProblem& problem,
                                    const std::vector<Snapshot>& snapshots,
                                    const SteeringGrid& grid);

struct CaimConfig {
  double gamma = 1.0;
  double mu = 1.0;
  AnnealConfig anneal;
  PhaseReference phase = PhaseReference::peak;
};

struct CaimResult {
  std::vector<ApEstimate> estimates;
  SolveResult solve;
};

/// Cooperative estimate: phase reference, joint QUBO, anneal, decode.
CaimResult estimate_caim(const std::vector<Snapshot>& snapshots, const SteeringGrid& grid,
                         std::span<const double> orientations, const CaimConfig& config);

/// Independent single-AP estimates (mu = 0, one QUBO of size N_r per AP).
std::vector<ApEstimate> estimate_aim(const std::vector<Snapshot>& snapshots,
                                     const SteeringGrid& grid, double gamma,
                                     const AnnealConfig& anneal,
                                     PhaseReference phase = PhaseReference::peak);

struct L1Config {
  double lambda = 4.0;
  int max_iters = 500;
  double tol = 1e-6;
  /// Support keeps bins with |s| above this fraction of max |s|.
  double support_threshold = 0.01;

  void validate() const;
};

struct L1Solution {
  Eigen::VectorXcd coefficients;
  /// 0.5 |y - Psi s|^2 + lambda |s|_1, one entry per iterate starting at s = 0.
  std::vector<double> objective_trace;
  int iterations = 0;
  bool converged = false;
};

/// Largest eigenvalue of Psi^H Psi by power iteration on the M x M matrix Psi Psi^H.
double lipschitz_constant(const Eigen::MatrixXcd& manifold, int max_iters = 500);

double l1_objective(const Eigen::MatrixXcd& manifold, const Eigen::VectorXcd& y,
                    const Eigen::VectorXcd& s, double lambda);

/// Proximal gradient (ISTA) with complex soft thresholding and step 1/L.
/// Returns s = 0 without iterating when lambda >= max |Psi^H y|.
L1Solution solve_l1(const Eigen::MatrixXcd& manifold, const Eigen::VectorXcd& y,
                    const L1Config& config);

/// Per-AP l1 sparse-recovery baseline ("RoArray-like (simplified)": no
/// cross-AP fusion). LoS is the support bin with the largest |s|.
std::vector<ApEstimate> estimate_l1(const std::vector<Snapshot>& snapshots,
                                    const SteeringGrid& grid, const L1Config& config);

}  // namespace caim
