#pragma once

#include "caim/estimator.hpp"
#include "caim/ising_solver.hpp"
#include "caim/qubo.hpp"
#include "caim/scene_sim.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

namespace caim {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);
double parse_double(const std::string& text);

nlohmann::json grid_to_json(const SteeringGrid& grid);
SteeringGrid grid_from_json(const nlohmann::json& j);

/// Snapshot files: snapshot_ap<k>.json, one per AP (k = 1..P), each self-describing
/// (grid, orientation, SNR, received vector, ground truth). Complex numbers
/// are [re, im] pairs.
nlohmann::json snapshot_to_json(const Snapshot& snapshot, int ap, const SteeringGrid& grid,
                                double snr_db, bool on_grid);

struct SnapshotSet {
  SteeringGrid grid;
  std::vector<Snapshot> snapshots;

  std::vector<double> orientations() const;
};

Snapshot snapshot_from_json(const nlohmann::json& j);
void write_snapshots(const std::filesystem::path& dir, const std::vector<Snapshot>& snapshots,
                     const SteeringGrid& grid, double snr_db, bool on_grid);
/// Loads every snapshot_ap*.json in dir, ordered by AP index.
SnapshotSet read_snapshots(const std::filesystem::path& dir);

/// Sparse text format, one record per line:
///   # caim-qubo 1
///   K <int>, P <int>, N_r <int>, gamma <real>, mu <real>, offset <real>
///                          header keys, one per line
///   S <p> <q> <bins>       rotation shift of AP pair p < q (optional)
///   b <i> <value>          for every i
///   W <i> <j> <value>      for i < j with W_ij != 0 (W_ji implied)
/// Reals use shortest round-trip formatting, so export/import is bit-exact.
void write_qubo(std::ostream& out, const QuboProblem& problem);
QuboProblem read_qubo(std::istream& in);

nlohmann::json estimates_to_json(const std::vector<ApEstimate>& estimates,
                                 const std::string& method_label);

/// CSV with header sweep,current_energy,best_energy.
void write_trace_csv(std::ostream& out, const std::vector<TracePoint>& trace);

void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace caim
