#include "caim/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace caim {

std::string to_string(PhaseReference mode) {
  switch (mode) {
    case PhaseReference::none: return "none";
    case PhaseReference::first_element: return "first_element";
    case PhaseReference::peak: return "peak";
  }
  return "?";
}

PhaseReference parse_phase_reference(const std::string& text) {
  if (text == "none") return PhaseReference::none;
  if (text == "first_element") return PhaseReference::first_element;
  if (text == "peak") return PhaseReference::peak;
  throw std::invalid_argument("unknown phase reference '" + text + "'");
}

std::vector<Snapshot> reference_phase(const std::vector<Snapshot>& snapshots,
                                      const SteeringGrid& grid, PhaseReference mode) {
  std::vector<Snapshot> out = snapshots;
  if (mode == PhaseReference::none) return out;
  for (auto& s : out) {
    Complex anchor;
    if (mode == PhaseReference::first_element) {
      anchor = s.received(0);
    } else {
      const Eigen::VectorXcd corr = grid.manifold().adjoint() * s.received;
      Eigen::Index k = 0;
      corr.cwiseAbs().maxCoeff(&k);
      anchor = corr(k);
    }
    if (std::abs(anchor) > 0.0) s.received *= std::conj(anchor) / std::abs(anchor);
  }
  return out;
}

namespace {

std::vector<Complex> refit(const SteeringGrid& grid, const Eigen::VectorXcd& y,
                           const std::vector<int>& bins) {
  if (bins.empty()) return {};
  Eigen::MatrixXcd a(grid.num_elements(), static_cast<Eigen::Index>(bins.size()));
  for (std::size_t c = 0; c < bins.size(); ++c) a.col(c) = grid.manifold().col(bins[c]);
  const Eigen::VectorXcd amp = a.completeOrthogonalDecomposition().solve(y);
  return {amp.data(), amp.data() + amp.size()};
}

// Most votes, then largest |amplitude|, then lowest bin (bins are ascending).
void pick_los(ApEstimate& est, const SteeringGrid& grid) {
  if (est.empty()) return;
  std::size_t best = 0;
  for (std::size_t c = 1; c < est.detected_bins.size(); ++c) {
    const int dv = est.alignment_votes[c] - est.alignment_votes[best];
    const double da = std::abs(est.refit_amplitudes[c]) - std::abs(est.refit_amplitudes[best]);
    if (dv > 0 || (dv == 0 && da > 0.0)) best = c;
  }
  est.los_bin = est.detected_bins[best];
  est.los_angle_deg = grid.angle(*est.los_bin);
}

// Each AP's shift to every other AP, as (q, shift) with q's bin = shifted(h).
std::vector<std::vector<std::pair<int, RotationShift>>> partner_shifts(const QuboProblem& problem) {
  std::vector<std::vector<std::pair<int, RotationShift>>> out(problem.index().num_aps);
  for (const auto& ps : problem.shifts()) {
    out[ps.p].emplace_back(ps.q, ps.shift);
    RotationShift back = ps.shift;
    back.bins = (ps.shift.num_bins - ps.shift.bins) % ps.shift.num_bins;
    back.angle_deg = -ps.shift.angle_deg;
    out[ps.q].emplace_back(ps.p, back);
  }
  return out;
}

}  // namespace

std::vector<ApEstimate> decode_caim(const BinaryState& solution, const QuboProblem& problem,
                                    const std::vector<Snapshot>& snapshots,
                                    const SteeringGrid& grid) {
  const IndexMap& index = problem.index();
  if (static_cast<int>(solution.size()) != index.size()) {
    throw std::invalid_argument("decode_caim: solution length mismatch");
  }
  if (static_cast<int>(snapshots.size()) != index.num_aps || index.num_bins != grid.num_bins()) {
    throw std::invalid_argument("decode_caim: problem does not match snapshots/grid");
  }
  const auto states = split_state(solution, index);
  const auto partners = partner_shifts(problem);

  std::vector<ApEstimate> out(index.num_aps);
  for (int p = 0; p < index.num_aps; ++p) {
    ApEstimate& est = out[p];
    for (int h = 0; h < index.num_bins; ++h) {
      if (!states[p][h]) continue;
      est.detected_bins.push_back(h);
      est.detected_angles_deg.push_back(grid.angle(h));
      int votes = 0;
      for (const auto& [q, shift] : partners[p]) votes += states[q][shifted_index(h, shift)];
      est.alignment_votes.push_back(votes);
    }
    est.refit_amplitudes = refit(grid, snapshots[p].received, est.detected_bins);
    pick_los(est, grid);
  }
  return out;
}

CaimResult estimate_caim(const std::vector<Snapshot>& snapshots, const SteeringGrid& grid,
                         std::span<const double> orientations, const CaimConfig& config) {
  const auto referenced = reference_phase(snapshots, grid, config.phase);
  const auto problem = build_qubo(referenced, grid, orientations, config.gamma, config.mu);
  CaimResult out;
  out.solve = anneal(problem, config.anneal);
  out.estimates = decode_caim(out.solve.best_state, problem, referenced, grid);
  return out;
}

std::vector<ApEstimate> estimate_aim(const std::vector<Snapshot>& snapshots,
                                     const SteeringGrid& grid, double gamma,
                                     const AnnealConfig& anneal_config, PhaseReference phase) {
  const auto referenced = reference_phase(snapshots, grid, phase);
  std::vector<ApEstimate> out;
  for (std::size_t p = 0; p < referenced.size(); ++p) {
    const std::vector<Snapshot> single{referenced[p]};
    const double orientation = referenced[p].orientation_deg;
    const auto problem = build_qubo(single, grid, std::span<const double>(&orientation, 1), gamma, 0.0);
    AnnealConfig cfg = anneal_config;
    cfg.seed = anneal_config.seed + 0x9e3779b97f4a7c15ull * (p + 1);
    cfg.record_trace = false;
    const auto solved = anneal(problem, cfg);
    out.push_back(decode_caim(solved.best_state, problem, single, grid).front());
  }
  return out;
}

void L1Config::validate() const {
  if (!(lambda > 0.0)) throw std::invalid_argument("L1Config: lambda must be > 0");
  if (max_iters < 1) throw std::invalid_argument("L1Config: max_iters must be >= 1");
  if (!(tol > 0.0)) throw std::invalid_argument("L1Config: tol must be > 0");
  if (!(support_threshold > 0.0 && support_threshold < 1.0)) {
    throw std::invalid_argument("L1Config: support_threshold must lie in (0, 1)");
  }
}

double lipschitz_constant(const Eigen::MatrixXcd& manifold, int max_iters) {
  const Eigen::MatrixXcd outer = manifold * manifold.adjoint();
  Eigen::VectorXcd v = Eigen::VectorXcd::Ones(outer.rows()).normalized();
  double estimate = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    Eigen::VectorXcd w = outer * v;
    const double next = std::real(v.dot(w));
    v = w.normalized();
    if (std::abs(next - estimate) <= 1e-15 * std::abs(next)) {
      estimate = next;
      break;
    }
    estimate = next;
  }
  // The Rayleigh quotient approaches the top eigenvalue from below.
  return estimate * (1.0 + 1e-9);
}

double l1_objective(const Eigen::MatrixXcd& manifold, const Eigen::VectorXcd& y,
                    const Eigen::VectorXcd& s, double lambda) {
  return 0.5 * (y - manifold * s).squaredNorm() + lambda * s.cwiseAbs().sum();
}

L1Solution solve_l1(const Eigen::MatrixXcd& manifold, const Eigen::VectorXcd& y,
                    const L1Config& config) {
  config.validate();
  const double step = 1.0 / lipschitz_constant(manifold);
  const double threshold = config.lambda * step;

  L1Solution out;
  out.coefficients = Eigen::VectorXcd::Zero(manifold.cols());
  out.objective_trace.push_back(l1_objective(manifold, y, out.coefficients, config.lambda));
  if ((manifold.adjoint() * y).cwiseAbs().maxCoeff() <= config.lambda) {
    out.converged = true;
    return out;
  }
  Eigen::VectorXcd next(manifold.cols());
  for (int it = 0; it < config.max_iters; ++it) {
    const Eigen::VectorXcd grad_step =
        out.coefficients + step * (manifold.adjoint() * (y - manifold * out.coefficients));
    for (Eigen::Index k = 0; k < grad_step.size(); ++k) {
      const double mag = std::abs(grad_step(k));
      next(k) = mag > threshold ? grad_step(k) * ((mag - threshold) / mag) : Complex(0.0, 0.0);
    }
    const double change = (next - out.coefficients).norm();
    const double scale = std::max(1.0, out.coefficients.norm());
    out.coefficients.swap(next);
    out.objective_trace.push_back(l1_objective(manifold, y, out.coefficients, config.lambda));
    out.iterations = it + 1;
    if (change <= config.tol * scale) {
      out.converged = true;
      break;
    }
  }
  return out;
}

std::vector<ApEstimate> estimate_l1(const std::vector<Snapshot>& snapshots,
                                    const SteeringGrid& grid, const L1Config& config) {
  std::vector<ApEstimate> out;
  for (const auto& snap : snapshots) {
    const L1Solution sol = solve_l1(grid.manifold(), snap.received, config);
    ApEstimate est;
    est.converged = sol.converged;
    const double peak = sol.coefficients.cwiseAbs().maxCoeff();
    if (peak > 0.0) {
      for (int h = 0; h < grid.num_bins(); ++h) {
        if (std::abs(sol.coefficients(h)) > config.support_threshold * peak) {
          est.detected_bins.push_back(h);
          est.detected_angles_deg.push_back(grid.angle(h));
          est.alignment_votes.push_back(0);
          est.refit_amplitudes.push_back(sol.coefficients(h));
        }
      }
    }
    pick_los(est, grid);
    out.push_back(std::move(est));
  }
  return out;
}

}  // namespace caim
