#include "caim/qubo.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace caim {

std::vector<PairShift> pair_shifts(std::span<const double> orientations,
                                   const SteeringGrid& grid) {
  std::vector<PairShift> out;
  const int n = static_cast<int>(orientations.size());
  for (int p = 0; p < n; ++p) {
    for (int q = p + 1; q < n; ++q) {
      out.push_back({p, q, rotation_shift(orientations[p] - orientations[q], grid)});
    }
  }
  return out;
}

std::vector<std::pair<int, int>> alignment_pairs(const IndexMap& index,
                                                 std::span<const PairShift> shifts) {
  std::vector<std::pair<int, int>> out;
  out.reserve(shifts.size() * index.num_bins);
  for (const auto& ps : shifts) {
    for (int h = 0; h < index.num_bins; ++h) {
      out.emplace_back(index.flat(ps.p, h), index.flat(ps.q, shifted_index(h, ps.shift)));
    }
  }
  return out;
}

QuboProblem::QuboProblem(IndexMap index, Eigen::VectorXd bias,
                         std::vector<std::shared_ptr<const Eigen::MatrixXd>> blocks,
                         std::vector<CrossCoupling> couplings, double offset, double gamma,
                         double mu, std::vector<PairShift> shifts)
    : index_(index),
      bias_(std::move(bias)),
      blocks_(std::move(blocks)),
      couplings_(std::move(couplings)),
      adjacency_(index.size()),
      offset_(offset),
      gamma_(gamma),
      mu_(mu),
      shifts_(std::move(shifts)) {
  if (index_.num_aps < 1 || index_.num_bins < 1) {
    throw std::invalid_argument("QuboProblem: empty index map");
  }
  if (bias_.size() != index_.size()) {
    throw std::invalid_argument("QuboProblem: bias length " + std::to_string(bias_.size()) +
                                " does not match K = " + std::to_string(index_.size()));
  }
  if (static_cast<int>(blocks_.size()) != index_.num_aps) {
    throw std::invalid_argument("QuboProblem: need one coupling block per AP");
  }
  for (const auto& b : blocks_) {
    if (!b || b->rows() != index_.num_bins || b->cols() != index_.num_bins) {
      throw std::invalid_argument("QuboProblem: coupling block has wrong shape");
    }
  }
  for (auto& c : couplings_) {
    if (c.i > c.j) std::swap(c.i, c.j);
    if (c.i < 0 || c.j >= index_.size()) {
      throw std::invalid_argument("QuboProblem: coupling index out of range");
    }
    if (index_.split(c.i).first == index_.split(c.j).first) {
      throw std::invalid_argument("QuboProblem: cross coupling inside a single AP block");
    }
    adjacency_[c.i].emplace_back(c.j, c.weight);
    adjacency_[c.j].emplace_back(c.i, c.weight);
  }
}

QuboProblem QuboProblem::from_dense(const Eigen::VectorXd& bias, const Eigen::MatrixXd& coupling) {
  const auto k = static_cast<int>(bias.size());
  if (coupling.rows() != k || coupling.cols() != k) {
    throw std::invalid_argument("QuboProblem::from_dense: shape mismatch");
  }
  if (!coupling.isApprox(coupling.transpose(), 0.0) || coupling.diagonal().cwiseAbs().maxCoeff() != 0.0) {
    throw std::invalid_argument("QuboProblem::from_dense: W must be symmetric with zero diagonal");
  }
  return QuboProblem(IndexMap{1, k}, bias, {std::make_shared<const Eigen::MatrixXd>(coupling)}, {});
}

double QuboProblem::coupling(int i, int j) const {
  const auto [p, h] = index_.split(i);
  const auto [q, g] = index_.split(j);
  if (p == q) return (*blocks_[p])(h, g);
  for (const auto& [n, w] : adjacency_[i]) {
    if (n == j) return w;
  }
  return 0.0;
}

Eigen::MatrixXd QuboProblem::dense_coupling() const {
  const int k = size();
  const int nr = index_.num_bins;
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(k, k);
  for (int p = 0; p < index_.num_aps; ++p) w.block(p * nr, p * nr, nr, nr) = *blocks_[p];
  for (const auto& c : couplings_) {
    w(c.i, c.j) += c.weight;
    w(c.j, c.i) += c.weight;
  }
  return w;
}

namespace {

void check_inputs(const std::vector<Snapshot>& snapshots, const SteeringGrid& grid,
                  std::span<const double> orientations) {
  if (snapshots.empty()) throw std::invalid_argument("no snapshots");
  if (orientations.size() != snapshots.size()) {
    throw std::invalid_argument("orientation count " + std::to_string(orientations.size()) +
                                " does not match snapshot count " +
                                std::to_string(snapshots.size()));
  }
  for (const auto& s : snapshots) {
    if (s.received.size() != grid.num_elements()) {
      throw std::invalid_argument("snapshot length " + std::to_string(s.received.size()) +
                                  " does not match array size " +
                                  std::to_string(grid.num_elements()));
    }
  }
}

}  // namespace

QuboProblem build_qubo(const std::vector<Snapshot>& snapshots, const SteeringGrid& grid,
                       std::span<const double> orientations, double gamma, double mu) {
  check_inputs(snapshots, grid, orientations);
  if (!(gamma > 0.0)) throw std::invalid_argument("build_qubo: gamma must be > 0");
  if (!(mu >= 0.0)) throw std::invalid_argument("build_qubo: mu must be >= 0");

  const int num_aps = static_cast<int>(snapshots.size());
  const int nr = grid.num_bins();
  const IndexMap index{num_aps, nr};
  const Eigen::MatrixXd& gram = grid.gram_real();

  Eigen::VectorXd bias(index.size());
  double offset = 0.0;
  for (int p = 0; p < num_aps; ++p) {
    const Eigen::VectorXd corr = (grid.manifold().adjoint() * snapshots[p].received).real();
    bias.segment(p * nr, nr) =
        -(1.0 + gamma * gram.diagonal().array() - 2.0 * gamma * corr.array() + (num_aps - 1) * mu)
             .matrix();
    offset += gamma * snapshots[p].received.squaredNorm();
  }

  auto block = std::make_shared<Eigen::MatrixXd>(-gamma * gram);
  block->diagonal().setZero();
  std::vector<std::shared_ptr<const Eigen::MatrixXd>> blocks(num_aps, block);

  auto shifts = pair_shifts(orientations, grid);
  std::vector<CrossCoupling> couplings;
  for (const auto& [i, j] : alignment_pairs(index, shifts)) couplings.push_back({i, j, mu});

  return QuboProblem(index, std::move(bias), std::move(blocks), std::move(couplings), offset,
                     gamma, mu, std::move(shifts));
}

double qubo_energy(const QuboProblem& problem, const BinaryState& state) {
  if (static_cast<int>(state.size()) != problem.size()) {
    throw std::invalid_argument("qubo_energy: state length " + std::to_string(state.size()) +
                                " does not match K = " + std::to_string(problem.size()));
  }
  const IndexMap& index = problem.index();
  double energy = 0.0;
  std::vector<int> support;
  for (int p = 0; p < index.num_aps; ++p) {
    support.clear();
    for (int h = 0; h < index.num_bins; ++h) {
      if (state[index.flat(p, h)]) support.push_back(h);
    }
    const Eigen::MatrixXd& w = problem.block(p);
    for (int h : support) {
      energy -= problem.bias()(index.flat(p, h));
      for (int g : support) energy -= w(h, g);
    }
  }
  for (const auto& c : problem.couplings()) {
    if (state[c.i] && state[c.j]) energy -= 2.0 * c.weight;
  }
  return energy;
}

std::vector<BinaryState> split_state(const BinaryState& state, const IndexMap& index) {
  if (static_cast<int>(state.size()) != index.size()) {
    throw std::invalid_argument("split_state: length mismatch");
  }
  std::vector<BinaryState> out;
  for (int p = 0; p < index.num_aps; ++p) {
    out.emplace_back(state.begin() + p * index.num_bins, state.begin() + (p + 1) * index.num_bins);
  }
  return out;
}

long long penalty_g(std::span<const BinaryState> states, std::span<const PairShift> shifts) {
  long long total = 0;
  for (const auto& ps : shifts) {
    const BinaryState& xp = states[ps.p];
    const BinaryState& xq = states[ps.q];
    for (int h = 0; h < static_cast<int>(xp.size()); ++h) {
      total += xp[h] != xq[shifted_index(h, ps.shift)];
    }
  }
  return total;
}

double objective_value(const std::vector<Snapshot>& snapshots, const SteeringGrid& grid,
                       std::span<const double> orientations, double gamma, double mu,
                       const BinaryState& state) {
  check_inputs(snapshots, grid, orientations);
  const IndexMap index{static_cast<int>(snapshots.size()), grid.num_bins()};
  const auto states = split_state(state, index);

  double value = 0.0;
  for (int p = 0; p < index.num_aps; ++p) {
    Eigen::VectorXcd residual = snapshots[p].received;
    for (int h = 0; h < index.num_bins; ++h) {
      if (states[p][h]) {
        residual -= grid.manifold().col(h);
        value += 1.0;
      }
    }
    value += gamma * residual.squaredNorm();
  }
  const auto shifts = pair_shifts(orientations, grid);
  return value + mu * static_cast<double>(penalty_g(states, shifts));
}

}  // namespace caim
