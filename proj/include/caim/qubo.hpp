#pragma once

#include "caim/array_model.hpp"
#include "caim/scene_sim.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace caim {

/// Binary indicator vector, one byte per variable, entries in {0, 1}.
using BinaryState = std::vector<std::uint8_t>;

/// Flat layout of the stacked per-AP indicators: i = p * N_r + h.
struct IndexMap {
  int num_aps = 1;
  int num_bins = 1;

  int size() const { return num_aps * num_bins; }
  int flat(int p, int h) const { return p * num_bins + h; }
  std::pair<int, int> split(int i) const { return {i / num_bins, i % num_bins}; }
};

/// Rotation between APs p < q, alpha = phi_p - phi_q.
struct PairShift {
  int p = 0;
  int q = 0;
  RotationShift shift;
};

std::vector<PairShift> pair_shifts(std::span<const double> orientations, const SteeringGrid& grid);

/// Cross-AP coupling between flat indices i < j.
struct CrossCoupling {
  int i = 0;
  int j = 0;
  double weight = 0.0;
};

/// Flat index pairs (i in p's block, j in q's block) whose bins are aligned
/// under the pair's rotation; exactly N_r pairs per AP pair.
std::vector<std::pair<int, int>> alignment_pairs(const IndexMap& index,
                                                 std::span<const PairShift> shifts);

/// E(x) = -sum_i b_i x_i - sum_i sum_j W_ij x_i x_j with W symmetric and a
/// zero diagonal. W is stored as dense N_r x N_r diagonal blocks (one per AP,
/// possibly shared) plus a sparse list of cross-block couplings.
class QuboProblem {
 public:
  QuboProblem(IndexMap index, Eigen::VectorXd bias,
              std::vector<std::shared_ptr<const Eigen::MatrixXd>> blocks,
              std::vector<CrossCoupling> couplings, double offset = 0.0, double gamma = 0.0,
              double mu = 0.0, std::vector<PairShift> shifts = {});

  /// Single-block problem from a dense symmetric zero-diagonal W.
  static QuboProblem from_dense(const Eigen::VectorXd& bias, const Eigen::MatrixXd& coupling);

  int size() const { return index_.size(); }
  const IndexMap& index() const { return index_; }
  const Eigen::VectorXd& bias() const { return bias_; }
  const Eigen::MatrixXd& block(int p) const { return *blocks_[p]; }
  const std::vector<CrossCoupling>& couplings() const { return couplings_; }
  /// Cross-block neighbours of flat index i as (j, W_ij).
  const std::vector<std::pair<int, double>>& neighbours(int i) const { return adjacency_[i]; }
  const std::vector<PairShift>& shifts() const { return shifts_; }

  double offset() const { return offset_; }
  double gamma() const { return gamma_; }
  double mu() const { return mu_; }

  double coupling(int i, int j) const;
  Eigen::MatrixXd dense_coupling() const;

 private:
  IndexMap index_;
  Eigen::VectorXd bias_;
  std::vector<std::shared_ptr<const Eigen::MatrixXd>> blocks_;
  std::vector<CrossCoupling> couplings_;
  std::vector<std::vector<std::pair<int, double>>> adjacency_;
  double offset_;
  double gamma_;
  double mu_;
  std::vector<PairShift> shifts_;
};

/// Cooperative binary objective in QUBO form:
///   b_i  = -(1 + gamma*M - 2*gamma*Re{(Psi^H y_p)_h} + (P-1)*mu),  i = (p, h)
///   W_ij = -gamma*Re{(Psi^H Psi)_{h,h'}} inside an AP block (i != j),
///   W_ij = W_ji = mu on alignment pairs, 0 elsewhere,
///   offset = gamma * sum_p |y_p|^2,
/// so that qubo_energy(x) + offset equals objective_value(x).
QuboProblem build_qubo(const std::vector<Snapshot>& snapshots, const SteeringGrid& grid,
                       std::span<const double> orientations, double gamma, double mu);

double qubo_energy(const QuboProblem& problem, const BinaryState& state);

/// Slices the AP blocks out of a flat state.
std::vector<BinaryState> split_state(const BinaryState& state, const IndexMap& index);

/// Sum over AP pairs of the Hamming distance between x_p and the rotated x_q.
long long penalty_g(std::span<const BinaryState> states, std::span<const PairShift> shifts);

/// Direct evaluation of
///   sum_p (|x_p|_0 + gamma |y_p - Psi x_p|^2) + mu * g(x)
/// without any QUBO matrices.
double objective_value(const std::vector<Snapshot>& snapshots, const SteeringGrid& grid,
                       std::span<const double> orientations, double gamma, double mu,
                       const BinaryState& state);

}  // namespace caim
