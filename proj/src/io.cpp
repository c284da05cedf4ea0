#include "caim/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <stdexcept>

namespace caim {

using nlohmann::json;

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw std::invalid_argument("not a number: '" + text + "'");
  }
  return value;
}

namespace {

json complex_json(Complex c) { return json::array({c.real(), c.imag()}); }

Complex complex_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw std::invalid_argument("expected [re, im] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

json grid_to_json(const SteeringGrid& grid) {
  return {{"num_elements", grid.num_elements()},
          {"spacing_over_wavelength", grid.geometry().spacing_over_wavelength},
          {"num_bins", grid.num_bins()},
          {"theta_min", grid.theta_min()},
          {"theta_max", grid.theta_max()}};
}

SteeringGrid grid_from_json(const json& j) {
  ArrayGeometry geometry{j.at("num_elements").get<int>(),
                         j.at("spacing_over_wavelength").get<double>()};
  return build_grid(geometry, j.at("num_bins").get<int>(), j.at("theta_min").get<double>(),
                    j.at("theta_max").get<double>());
}

json snapshot_to_json(const Snapshot& snapshot, int ap, const SteeringGrid& grid, double snr_db,
                      bool on_grid) {
  json received = json::array();
  for (Eigen::Index m = 0; m < snapshot.received.size(); ++m) {
    received.push_back(complex_json(snapshot.received(m)));
  }
  json truth = json::array();
  for (const auto& path : snapshot.truth) {
    truth.push_back({{"angle_deg", path.angle_deg}, {"gain", complex_json(path.gain)}});
  }
  json j = {{"format", "caim-snapshot"},
            {"version", 1},
            {"ap", ap},
            {"orientation_deg", snapshot.orientation_deg},
            {"grid", grid_to_json(grid)},
            {"snr_db", std::isfinite(snr_db) ? json(snr_db) : json(nullptr)},
            {"on_grid", on_grid},
            {"received", received},
            {"truth", truth},
            {"los_angle_deg", snapshot.los_angle_deg()},
            {"los_bin", snapshot.los_bin ? json(*snapshot.los_bin) : json(nullptr)}};
  return j;
}

Snapshot snapshot_from_json(const json& j) {
  if (j.value("format", "") != "caim-snapshot") {
    throw std::invalid_argument("not a caim-snapshot document");
  }
  Snapshot s;
  s.orientation_deg = j.at("orientation_deg").get<double>();
  const auto& rec = j.at("received");
  s.received.resize(static_cast<Eigen::Index>(rec.size()));
  for (std::size_t m = 0; m < rec.size(); ++m) s.received(m) = complex_from(rec[m]);
  for (const auto& t : j.at("truth")) {
    s.truth.push_back({t.at("angle_deg").get<double>(), complex_from(t.at("gain"))});
  }
  if (s.truth.empty()) throw std::invalid_argument("snapshot has no ground-truth paths");
  if (!j.at("los_bin").is_null()) s.los_bin = j.at("los_bin").get<int>();
  return s;
}

std::vector<double> SnapshotSet::orientations() const {
  std::vector<double> out;
  for (const auto& s : snapshots) out.push_back(s.orientation_deg);
  return out;
}

void write_snapshots(const std::filesystem::path& dir, const std::vector<Snapshot>& snapshots,
                     const SteeringGrid& grid, double snr_db, bool on_grid) {
  std::filesystem::create_directories(dir);
  for (std::size_t p = 0; p < snapshots.size(); ++p) {
    const auto doc = snapshot_to_json(snapshots[p], static_cast<int>(p) + 1, grid, snr_db, on_grid);
    write_text_file(dir / ("snapshot_ap" + std::to_string(p + 1) + ".json"), doc.dump(2) + "\n");
  }
}

SnapshotSet read_snapshots(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw std::invalid_argument("snapshot directory not found: " + dir.string());
  }
  const std::regex name(R"(snapshot_ap(\d+)\.json)");
  std::map<int, json> docs;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    std::smatch m;
    const std::string file = entry.path().filename().string();
    if (!std::regex_match(file, m, name)) continue;
    std::ifstream in(entry.path());
    docs[std::stoi(m[1])] = json::parse(in);
  }
  if (docs.empty()) throw std::invalid_argument("no snapshot_ap*.json files in " + dir.string());
  int expected = 1;
  for (const auto& [ap, doc] : docs) {
    if (ap != expected++) throw std::invalid_argument("snapshot AP numbers must run 1, 2, ..., P");
  }
  SnapshotSet set{grid_from_json(docs.begin()->second.at("grid")), {}};
  for (const auto& [ap, doc] : docs) {
    if (doc.at("grid") != docs.begin()->second.at("grid")) {
      throw std::invalid_argument("snapshots do not share one grid");
    }
    set.snapshots.push_back(snapshot_from_json(doc));
  }
  return set;
}

void write_qubo(std::ostream& out, const QuboProblem& problem) {
  const IndexMap& index = problem.index();
  out << "# caim-qubo 1\n";
  out << "K " << problem.size() << "\n";
  out << "P " << index.num_aps << "\n";
  out << "N_r " << index.num_bins << "\n";
  out << "gamma " << format_double(problem.gamma()) << "\n";
  out << "mu " << format_double(problem.mu()) << "\n";
  out << "offset " << format_double(problem.offset()) << "\n";
  for (const auto& ps : problem.shifts()) {
    out << "S " << ps.p << ' ' << ps.q << ' ' << ps.shift.bins << "\n";
  }
  for (int i = 0; i < problem.size(); ++i) {
    out << "b " << i << ' ' << format_double(problem.bias()(i)) << "\n";
  }
  // Row-major over i < j: intra-block entries first within each row, then cross entries.
  std::vector<std::vector<std::pair<int, double>>> cross(problem.size());
  for (const auto& c : problem.couplings()) cross[c.i].emplace_back(c.j, c.weight);
  for (int i = 0; i < problem.size(); ++i) {
    const auto [p, h] = index.split(i);
    const Eigen::MatrixXd& block = problem.block(p);
    for (int g = h + 1; g < index.num_bins; ++g) {
      if (block(h, g) != 0.0) {
        out << "W " << i << ' ' << index.flat(p, g) << ' ' << format_double(block(h, g)) << "\n";
      }
    }
    auto& row = cross[i];
    std::sort(row.begin(), row.end());
    for (const auto& [j, w] : row) {
      if (w != 0.0) out << "W " << i << ' ' << j << ' ' << format_double(w) << "\n";
    }
  }
}

QuboProblem read_qubo(std::istream& in) {
  std::map<std::string, std::string> header;
  std::string line;
  int k = -1;
  int num_aps = -1;
  int num_bins = -1;
  Eigen::VectorXd bias;
  std::vector<Eigen::MatrixXd> blocks;
  std::vector<CrossCoupling> couplings;
  std::vector<PairShift> shifts;
  std::vector<bool> seen_bias;
  int line_no = 0;

  auto ensure_shape = [&]() {
    if (!blocks.empty()) return;
    if (k < 0 || num_aps < 1 || num_bins < 1 || k != num_aps * num_bins) {
      throw std::invalid_argument("qubo: header must give K = P * N_r before entries");
    }
    bias = Eigen::VectorXd::Zero(k);
    seen_bias.assign(k, false);
    blocks.assign(num_aps, Eigen::MatrixXd::Zero(num_bins, num_bins));
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    auto fail = [&](const std::string& what) {
      throw std::invalid_argument("qubo line " + std::to_string(line_no) + ": " + what);
    };
    if (tag == "b") {
      ensure_shape();
      int i;
      std::string v;
      if (!(ls >> i >> v) || i < 0 || i >= k || seen_bias[i]) fail("bad bias record");
      bias(i) = parse_double(v);
      seen_bias[i] = true;
    } else if (tag == "W") {
      ensure_shape();
      int i, j;
      std::string v;
      if (!(ls >> i >> j >> v) || i < 0 || j < 0 || i >= k || j >= k || i == j) {
        fail("bad coupling record");
      }
      if (i > j) std::swap(i, j);
      const double w = parse_double(v);
      const int p = i / num_bins;
      const int q = j / num_bins;
      if (p == q) {
        blocks[p](i % num_bins, j % num_bins) = w;
        blocks[p](j % num_bins, i % num_bins) = w;
      } else {
        couplings.push_back({i, j, w});
      }
    } else if (tag == "S") {
      ensure_shape();
      int p, q, bins;
      if (!(ls >> p >> q >> bins) || p < 0 || q <= p || q >= num_aps || bins < 0 ||
          bins >= num_bins) {
        fail("bad shift record");
      }
      shifts.push_back(
          {p, q, RotationShift{std::numeric_limits<double>::quiet_NaN(), bins, num_bins}});
    } else {
      static const std::set<std::string> keys{"K", "P", "N_r", "gamma", "mu", "offset"};
      if (!keys.count(tag)) fail("unknown record '" + tag + "'");
      if (!blocks.empty()) fail("header key '" + tag + "' after entries");
      std::string v;
      if (!(ls >> v)) fail("missing value for '" + tag + "'");
      header[tag] = v;
      if (tag == "K") k = std::stoi(v);
      if (tag == "P") num_aps = std::stoi(v);
      if (tag == "N_r") num_bins = std::stoi(v);
    }
  }
  ensure_shape();
  if (std::find(seen_bias.begin(), seen_bias.end(), false) != seen_bias.end()) {
    throw std::invalid_argument("qubo: missing bias records");
  }

  // Without S records, recover per-pair shifts when every coupling of a pair
  // has one bin offset.
  std::map<std::pair<int, int>, int> offsets;
  bool consistent = true;
  for (const auto& c : couplings) {
    const int p = c.i / num_bins, q = c.j / num_bins;
    const int d = ((c.j % num_bins) - (c.i % num_bins) + num_bins) % num_bins;
    auto [it, inserted] = offsets.emplace(std::make_pair(p, q), d);
    if (!inserted && it->second != d) consistent = false;
  }
  if (shifts.empty() && consistent) {
    for (const auto& [pq, d] : offsets) {
      shifts.push_back({pq.first, pq.second,
                        RotationShift{std::numeric_limits<double>::quiet_NaN(), d, num_bins}});
    }
  }

  std::vector<std::shared_ptr<const Eigen::MatrixXd>> shared;
  for (auto& b : blocks) shared.push_back(std::make_shared<const Eigen::MatrixXd>(std::move(b)));
  auto get = [&](const char* key) {
    auto it = header.find(key);
    return it == header.end() ? 0.0 : parse_double(it->second);
  };
  return QuboProblem(IndexMap{num_aps, num_bins}, std::move(bias), std::move(shared),
                     std::move(couplings), get("offset"), get("gamma"), get("mu"),
                     std::move(shifts));
}

json estimates_to_json(const std::vector<ApEstimate>& estimates, const std::string& method_label) {
  json aps = json::array();
  for (std::size_t p = 0; p < estimates.size(); ++p) {
    const auto& e = estimates[p];
    json amps = json::array();
    for (const auto& a : e.refit_amplitudes) amps.push_back(complex_json(a));
    aps.push_back({{"ap", p + 1},
                   {"empty", e.empty()},
                   {"los_bin", e.los_bin ? json(*e.los_bin) : json(nullptr)},
                   {"los_angle_deg", e.los_bin ? json(e.los_angle_deg) : json(nullptr)},
                   {"detected_bins", e.detected_bins},
                   {"detected_angles_deg", e.detected_angles_deg},
                   {"alignment_votes", e.alignment_votes},
                   {"amplitudes", amps},
                   {"converged", e.converged}});
  }
  return {{"format", "caim-estimates"}, {"version", 1}, {"method", method_label}, {"aps", aps}};
}

void write_trace_csv(std::ostream& out, const std::vector<TracePoint>& trace) {
  out << "sweep,current_energy,best_energy\n";
  for (const auto& t : trace) {
    out << t.sweep << ',' << format_double(t.current_energy) << ','
        << format_double(t.best_energy) << "\n";
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace caim
