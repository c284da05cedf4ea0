#include "caim/ising_solver.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace caim {

std::string to_string(AnnealMode mode) {
  return mode == AnnealMode::sequential ? "sequential" : "parallel_trial";
}

AnnealMode parse_anneal_mode(const std::string& text) {
  if (text == "sequential") return AnnealMode::sequential;
  if (text == "parallel_trial" || text == "parallel-trial") return AnnealMode::parallel_trial;
  throw std::invalid_argument("unknown anneal mode '" + text + "'");
}

void AnnealConfig::validate() const {
  if (sweeps < 1) throw std::invalid_argument("AnnealConfig: sweeps must be >= 1");
  if (restarts < 1) throw std::invalid_argument("AnnealConfig: restarts must be >= 1");
  if (!(t_final > 0.0) || !(t_initial >= t_final) || !std::isfinite(t_initial)) {
    throw std::invalid_argument("AnnealConfig: need t_initial >= t_final > 0");
  }
  if (!(offset_increment >= 0.0)) {
    throw std::invalid_argument("AnnealConfig: offset_increment must be >= 0");
  }
}

Eigen::VectorXd local_fields(const QuboProblem& problem, const BinaryState& state) {
  if (static_cast<int>(state.size()) != problem.size()) {
    throw std::invalid_argument("local_fields: state length mismatch");
  }
  const IndexMap& index = problem.index();
  const int nr = index.num_bins;
  Eigen::VectorXd fields = problem.bias();
  Eigen::VectorXd xp(nr);
  for (int p = 0; p < index.num_aps; ++p) {
    for (int h = 0; h < nr; ++h) xp(h) = state[index.flat(p, h)];
    fields.segment(p * nr, nr).noalias() += 2.0 * problem.block(p) * xp;
  }
  for (const auto& c : problem.couplings()) {
    if (state[c.j]) fields(c.i) += 2.0 * c.weight;
    if (state[c.i]) fields(c.j) += 2.0 * c.weight;
  }
  return fields;
}

FieldTracker::FieldTracker(const QuboProblem& problem, BinaryState state)
    : problem_(&problem),
      state_(std::move(state)),
      fields_(local_fields(problem, state_)),
      energy_(qubo_energy(problem, state_)) {}

void FieldTracker::flip(int i) {
  const double step = state_[i] ? -1.0 : 1.0;
  energy_ += delta(i);
  state_[i] ^= 1u;
  const auto [p, h] = problem_->index().split(i);
  const int nr = problem_->index().num_bins;
  fields_.segment(p * nr, nr) += (2.0 * step) * problem_->block(p).col(h);
  for (const auto& [j, w] : problem_->neighbours(i)) fields_(j) += 2.0 * step * w;
}

double FieldTracker::field_drift() const {
  return (fields_ - local_fields(*problem_, state_)).cwiseAbs().maxCoeff();
}

namespace {

std::mt19937_64 restart_rng(std::uint64_t seed, int restart) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(restart), 0xa11ea1u};
  return std::mt19937_64(seq);
}

double temperature(const AnnealConfig& config, int sweep) {
  if (config.sweeps == 1) return config.t_initial;
  const double frac = static_cast<double>(sweep) / (config.sweeps - 1);
  return config.t_initial * std::pow(config.t_final / config.t_initial, frac);
}

bool metropolis(double delta, double temp, std::mt19937_64& rng) {
  if (delta <= 0.0) return true;
  const double ratio = delta / temp;
  if (ratio > 40.0) return false;
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < std::exp(-ratio);
}

// Tracks the best state of a chain without copying on every improvement:
// the state is copied only when the chain steps uphill away from it.
struct BestKeeper {
  BinaryState state;
  double energy = std::numeric_limits<double>::infinity();
  int restart = 0;
  bool chain_at_best = false;

  void before_flip(const FieldTracker& t, double delta) {
    if (chain_at_best && delta > 0.0) {
      state = t.state();
      chain_at_best = false;
    }
  }
  void after_flip(const FieldTracker& t, int r) {
    if (t.energy() < energy) {
      energy = t.energy();
      restart = r;
      chain_at_best = true;
    }
  }
  void end_chain(const FieldTracker& t) {
    if (chain_at_best) state = t.state();
    chain_at_best = false;
  }
};

// Selected bits aligned with bit (p, h) in the other APs.
void aligned_partners(const QuboProblem& problem, const BinaryState& state, int p, int h,
                      std::vector<std::pair<int, int>>& out) {
  const IndexMap& index = problem.index();
  out.clear();
  out.emplace_back(p, h);
  for (const auto& ps : problem.shifts()) {
    int q = -1;
    int g = 0;
    if (ps.p == p) {
      q = ps.q;
      g = shifted_index(h, ps.shift);
    } else if (ps.q == p) {
      q = ps.p;
      g = aligned_index(h, ps.shift);
    }
    if (q >= 0 && state[index.flat(q, g)]) out.emplace_back(q, g);
  }
}

}  // namespace

int polish_state(const QuboProblem& problem, FieldTracker& tracker) {
  const IndexMap& index = problem.index();
  const int k = problem.size();
  const int nr = index.num_bins;
  std::vector<std::pair<int, int>> group;
  std::vector<int> flips;
  int moves = 0;
  bool improved = true;
  while (improved) {
    improved = false;
    for (int i = 0; i < k; ++i) {
      if (tracker.delta(i) < -1e-12 * (1.0 + std::abs(tracker.energy()))) {
        tracker.flip(i);
        ++moves;
        improved = true;
      }
    }
    for (int i = 0; i < k; ++i) {
      if (!tracker.state()[i]) continue;
      const auto [p, h] = index.split(i);
      for (int dir : {1, -1}) {
        aligned_partners(problem, tracker.state(), p, h, group);
        flips.clear();
        bool blocked = false;
        for (auto [q, g] : group) {
          const int target = index.flat(q, (g + dir + nr) % nr);
          if (tracker.state()[target]) blocked = true;
          flips.push_back(index.flat(q, g));
          flips.push_back(target);
        }
        if (blocked) continue;
        const double before = tracker.energy();
        for (int f : flips) tracker.flip(f);
        if (tracker.energy() < before - 1e-12 * (1.0 + std::abs(before))) {
          ++moves;
          improved = true;
          break;
        }
        for (auto it = flips.rbegin(); it != flips.rend(); ++it) tracker.flip(*it);
      }
    }
  }
  return moves;
}

SolveResult anneal(const QuboProblem& problem, const AnnealConfig& config) {
  config.validate();
  const int k = problem.size();
  SolveResult result;
  BestKeeper best;
  std::vector<int> order(k);
  std::vector<int> accepted;
  accepted.reserve(k);
  long long global_sweep = 0;

  for (int r = 0; r < config.restarts; ++r) {
    auto rng = restart_rng(config.seed, r);
    BinaryState init(k, 0);
    if (r > 0) {
      std::bernoulli_distribution coin(0.5);
      for (auto& b : init) b = coin(rng) ? 1 : 0;
    }
    FieldTracker tracker(problem, std::move(init));
    best.after_flip(tracker, r);

    for (int s = 0; s < config.sweeps; ++s, ++global_sweep) {
      const double temp = temperature(config, s);
      if (config.mode == AnnealMode::sequential) {
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        for (int i : order) {
          const double d = tracker.delta(i);
          if (!metropolis(d, temp, rng)) continue;
          best.before_flip(tracker, d);
          tracker.flip(i);
          ++result.flips_accepted;
          best.after_flip(tracker, r);
        }
      } else {
        double escape = 0.0;
        for (int step = 0; step < k; ++step) {
          accepted.clear();
          for (int i = 0; i < k; ++i) {
            if (metropolis(tracker.delta(i) - escape, temp, rng)) accepted.push_back(i);
          }
          if (accepted.empty()) {
            escape += config.offset_increment;
            continue;
          }
          const int pick = accepted[std::uniform_int_distribution<std::size_t>(
              0, accepted.size() - 1)(rng)];
          best.before_flip(tracker, tracker.delta(pick));
          tracker.flip(pick);
          ++result.flips_accepted;
          best.after_flip(tracker, r);
          escape = 0.0;
        }
      }
      if (config.record_trace) {
        result.energy_trace.push_back({global_sweep, tracker.energy(), best.energy});
      }
#ifndef NDEBUG
      if (s % 256 == 0) assert(tracker.field_drift() <= 1e-8 * (1.0 + tracker.fields().cwiseAbs().maxCoeff()));
#endif
    }
    if (config.polish) {
      best.before_flip(tracker, 1.0);
      if (polish_state(problem, tracker) > 0) {
        best.after_flip(tracker, r);
        if (config.record_trace) {
          result.energy_trace.back().current_energy = tracker.energy();
          result.energy_trace.back().best_energy = best.energy;
        }
      }
    }
    best.end_chain(tracker);
  }

  result.best_state = best.state;
  result.best_energy = qubo_energy(problem, result.best_state);
  result.restart_index = best.restart;
  return result;
}

ExactSolution brute_force(const QuboProblem& problem) {
  const int k = problem.size();
  if (k > kBruteForceMaxSize) {
    throw std::invalid_argument("brute_force: K = " + std::to_string(k) + " exceeds limit " +
                                std::to_string(kBruteForceMaxSize));
  }
  FieldTracker tracker(problem, BinaryState(k, 0));
  std::uint64_t best_code = 0;
  double best_energy = tracker.energy();
  const double tol = 1e-9;
  const std::uint64_t count = std::uint64_t{1} << k;
  for (std::uint64_t n = 1; n < count; ++n) {
    tracker.flip(std::countr_zero(n));
    const std::uint64_t code = n ^ (n >> 1);
    const double e = tracker.energy();
    const double scale = tol * (1.0 + std::abs(best_energy));
    if (e < best_energy - scale || (e <= best_energy + scale && code < best_code)) {
      best_energy = std::min(e, best_energy);
      best_code = code;
    }
  }
  ExactSolution out;
  out.state.resize(k);
  for (int i = 0; i < k; ++i) out.state[i] = (best_code >> i) & 1u;
  out.energy = qubo_energy(problem, out.state);
  return out;
}

}  // namespace caim
