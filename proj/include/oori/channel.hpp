#pragma once
// Geometric paths -> noisy channel observations (ToA, AoA, AoD, RSS), and
// labeled datasets along a UE trajectory.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oori/csv.hpp"
#include "oori/errors.hpp"
#include "oori/geometry.hpp"
#include "oori/parallel.hpp"
#include "oori/raytracer.hpp"
#include "oori/scene.hpp"

namespace oori {

inline constexpr double kSpeedOfLight = 299792458.0;

struct RadioConfig {
  double carrier_hz{28e9};
  double bandwidth_hz{400e6};
  double tx_power_dbm{30.0};

  void validate() const {
    if (!(carrier_hz > 0.0)) throw ConfigError("carrier_hz must be > 0");
    if (!(bandwidth_hz > 0.0)) throw ConfigError("bandwidth_hz must be > 0");
    if (!std::isfinite(tx_power_dbm)) throw ConfigError("tx_power_dbm must be finite");
  }
};

struct NoiseModel {
  double sigma_range{0.10};  ///< meters; ToA sigma is sigma_range / c
  double sigma_angle{1.0};   ///< degrees
  double sigma_rss{1.0};     ///< dB
  std::uint64_t seed{0};

  void validate() const {
    if (!(sigma_range >= 0.0) || !(sigma_angle >= 0.0) || !(sigma_rss >= 0.0)) {
      throw ConfigError("noise sigmas must be >= 0");
    }
  }

  static NoiseModel noiseless(std::uint64_t seed = 0) { return {0.0, 0.0, 0.0, seed}; }
};

struct GroundTruth {
  Point2 ue;
  double path_length{0.0};  ///< 2D geometric length
};

struct Measurement {
  double t{0.0};
  int gnb_id{0};
  int path_index{0};  ///< position within its (epoch, gNB) group
  double toa{0.0};    ///< seconds
  Bearing aoa;
  Bearing aod;
  double rss{0.0};  ///< dBm
  std::optional<int> label;
  std::optional<GroundTruth> truth;
};

/// Where a measurement sits in the dataset; keys its noise substream.
struct MeasurementContext {
  std::uint64_t epoch{0};
  double t{0.0};
  int gnb_id{0};
  int path_index{0};
  double delta_z{0.0};  ///< gNB height minus UE height
};

inline double fspl_db(double distance_m, double carrier_hz) {
  if (!(distance_m > 0.0) || !(carrier_hz > 0.0)) {
    throw DomainError("free-space path loss needs positive distance and carrier");
  }
  return 20.0 * std::log10(distance_m) + 20.0 * std::log10(carrier_hz) +
         20.0 * std::log10(4.0 * std::numbers::pi / kSpeedOfLight);
}

/// Deterministic engine for one (seed, epoch, gNB, path) tuple.
inline std::mt19937_64 noise_stream(std::uint64_t seed, std::uint64_t epoch, int gnb_id,
                                    int path_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(epoch), static_cast<std::uint32_t>(epoch >> 32),
                    static_cast<std::uint32_t>(gnb_id), static_cast<std::uint32_t>(path_index)};
  return std::mt19937_64(seq);
}

/// Path length in 3D for vertical walls: unfolding the reflections keeps the
/// height change linear in the horizontal distance travelled.
inline double slant_length(double length_2d, double delta_z) {
  return std::hypot(length_2d, delta_z);
}

inline Measurement path_to_measurement(const PropagationPath& path, const RadioConfig& radio,
                                       const NoiseModel& noise, const Scene& scene,
                                       const MeasurementContext& ctx = {}) {
  auto rng = noise_stream(noise.seed, ctx.epoch, ctx.gnb_id, ctx.path_index);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double e_range = gauss(rng) * noise.sigma_range;
  const double e_aoa = gauss(rng) * noise.sigma_angle;
  const double e_aod = gauss(rng) * noise.sigma_angle;
  const double e_rss = gauss(rng) * noise.sigma_rss;

  const double slant = slant_length(path.length, ctx.delta_z);
  double bounce_loss = 0.0;
  for (int id : path.wall_ids) bounce_loss += scene.walls().at(id).loss_db;

  Measurement m;
  m.t = ctx.t;
  m.gnb_id = ctx.gnb_id;
  m.path_index = ctx.path_index;
  m.toa = slant / kSpeedOfLight + e_range / kSpeedOfLight;
  m.aoa = Bearing(path.aoa.degrees() + e_aoa);
  m.aod = Bearing(path.aod.degrees() + e_aod);
  m.rss = radio.tx_power_dbm - fspl_db(slant, radio.carrier_hz) - bounce_loss + e_rss;
  m.label = path.order;
  m.truth = GroundTruth{path.vertices.back(), path.length};
  return m;
}

struct TrajectoryPoint {
  double t{0.0};
  Point2 position;
  double z{0.0};
};

/// Measurements of one UE epoch against one associated gNB. An empty
/// measurement list marks an outage.
struct EpochRecord {
  std::uint64_t epoch{0};
  double t{0.0};
  int gnb_id{0};
  int rank{0};  ///< 1 = nearest gNB, 2 = second nearest, 0 = unknown
  Point2 ue;
  double ue_z{0.0};
  std::vector<Measurement> measurements;

  [[nodiscard]] bool outage() const { return measurements.empty(); }
};

/// Nearest and second-nearest gNB by 2D distance; ties go to the lower id.
inline std::vector<const GnbSite*> associate(const Scene& scene, const Point2& ue,
                                             std::size_t count = 2) {
  std::vector<const GnbSite*> sites;
  for (const auto& g : scene.gnbs()) sites.push_back(&g);
  std::sort(sites.begin(), sites.end(), [&](const GnbSite* a, const GnbSite* b) {
    const double da = distance(a->position, ue);
    const double db = distance(b->position, ue);
    if (da != db) return da < db;
    return a->id < b->id;
  });
  if (sites.size() > count) sites.resize(count);
  return sites;
}

/// Association rank (1-based) of `gnb_id` for a UE at `ue`, 0 if not associated.
inline int association_rank(const Scene& scene, const Point2& ue, int gnb_id) {
  const auto sites = associate(scene, ue);
  for (std::size_t i = 0; i < sites.size(); ++i) {
    if (sites[i]->id == gnb_id) return static_cast<int>(i) + 1;
  }
  return 0;
}

struct DatasetOptions {
  int max_order{kDefaultMaxOrder};
  unsigned threads{1};
};

/// Geometry of one (epoch, gNB) association, independent of noise.
struct TracedEpoch {
  std::uint64_t epoch{0};
  double t{0.0};
  int gnb_id{0};
  int rank{0};
  Point2 ue;
  double ue_z{0.0};
  double delta_z{0.0};
  std::vector<PropagationPath> paths;
};

inline std::vector<TracedEpoch> trace_trajectory(const Scene& scene,
                                                 const std::vector<TrajectoryPoint>& trajectory,
                                                 const DatasetOptions& opts = {}) {
  if (trajectory.empty()) throw DataError("trajectory is empty");
  if (scene.gnbs().empty()) throw DataError("scene has no gNBs");
  if (opts.max_order < 0 || opts.max_order > kMaxOrderLimit) {
    throw ConfigError("max_order must lie in [0, 8]");
  }
  std::vector<std::vector<TracedEpoch>> per_epoch(trajectory.size());
  parallel_for(trajectory.size(), opts.threads, [&](std::size_t i) {
    const auto& tp = trajectory[i];
    const auto sites = associate(scene, tp.position);
    for (std::size_t rank = 0; rank < sites.size(); ++rank) {
      const GnbSite& g = *sites[rank];
      TracedEpoch te{i, tp.t, g.id, static_cast<int>(rank) + 1, tp.position, tp.z,
                     g.height - tp.z, {}};
      if (g.position != tp.position) {
        te.paths = trace_paths(scene, g.position, tp.position, opts.max_order);
      }
      per_epoch[i].push_back(std::move(te));
    }
  });
  std::vector<TracedEpoch> out;
  for (auto& v : per_epoch) {
    for (auto& r : v) out.push_back(std::move(r));
  }
  return out;
}

/// Noisy observations of already traced geometry.
inline std::vector<EpochRecord> measure_traced(const Scene& scene,
                                               const std::vector<TracedEpoch>& traced,
                                               const RadioConfig& radio, const NoiseModel& noise) {
  radio.validate();
  noise.validate();
  std::vector<EpochRecord> out;
  out.reserve(traced.size());
  for (const auto& te : traced) {
    EpochRecord rec{te.epoch, te.t, te.gnb_id, te.rank, te.ue, te.ue_z, {}};
    for (std::size_t k = 0; k < te.paths.size(); ++k) {
      MeasurementContext ctx{te.epoch, te.t, te.gnb_id, static_cast<int>(k), te.delta_z};
      rec.measurements.push_back(path_to_measurement(te.paths[k], radio, noise, scene, ctx));
    }
    out.push_back(std::move(rec));
  }
  return out;
}

inline std::vector<EpochRecord> generate_dataset(const Scene& scene,
                                                 const std::vector<TrajectoryPoint>& trajectory,
                                                 const RadioConfig& radio,
                                                 const NoiseModel& noise,
                                                 const DatasetOptions& opts = {}) {
  radio.validate();
  noise.validate();
  return measure_traced(scene, trace_trajectory(scene, trajectory, opts), radio, noise);
}

inline std::vector<Measurement> flatten(const std::vector<EpochRecord>& records) {
  std::vector<Measurement> out;
  for (const auto& r : records) out.insert(out.end(), r.measurements.begin(), r.measurements.end());
  return out;
}

/// `n` points spread evenly over the sample index of `traj`, linearly
/// interpolated; first and last points are kept exactly.
inline std::vector<TrajectoryPoint> resample_trajectory(const std::vector<TrajectoryPoint>& traj,
                                                        std::size_t n) {
  if (traj.size() < 2 || n < 2) throw ConfigError("resampling needs at least two points");
  std::vector<TrajectoryPoint> out(n);
  const double scale = static_cast<double>(traj.size() - 1) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    if (i + 1 == n) {
      out[i] = traj.back();
      continue;
    }
    const double s = static_cast<double>(i) * scale;
    const auto j = std::min(static_cast<std::size_t>(s), traj.size() - 2);
    const double f = s - static_cast<double>(j);
    const auto& a = traj[j];
    const auto& b = traj[j + 1];
    out[i] = {a.t + f * (b.t - a.t), a.position + (b.position - a.position) * f,
              a.z + f * (b.z - a.z)};
  }
  return out;
}

// ---- file formats ----------------------------------------------------------

inline void write_trajectory(std::ostream& out, const std::vector<TrajectoryPoint>& traj) {
  out << "t,x,y,z\n";
  for (const auto& p : traj) {
    out << csv::fmt(p.t) << ',' << csv::fmt(p.position.x) << ',' << csv::fmt(p.position.y) << ','
        << csv::fmt(p.z) << '\n';
  }
}

inline std::vector<TrajectoryPoint> read_trajectory(const std::string& path) {
  const auto table = csv::read(path);
  const auto ct = table.require("t");
  const auto cx = table.require("x");
  const auto cy = table.require("y");
  const auto cz = table.require("z");
  std::vector<TrajectoryPoint> out;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    out.push_back({table.number(i, ct), {table.number(i, cx), table.number(i, cy)},
                   table.number(i, cz)});
  }
  if (out.empty()) throw DataError(path + ": trajectory has no rows");
  return out;
}

inline void write_dataset(std::ostream& out, const std::vector<EpochRecord>& records,
                          bool with_truth) {
  out << "t,gnb_id,toa_s,aoa_deg,aod_deg,rss_dbm,label";
  if (with_truth) out << ",ue_x,ue_y,path_len_m";
  out << '\n';
  for (const auto& r : records) {
    if (r.outage()) {
      out << csv::fmt(r.t) << ',' << r.gnb_id << ",,,,,";
      if (with_truth) out << ',' << csv::fmt(r.ue.x) << ',' << csv::fmt(r.ue.y) << ',';
      out << '\n';
      continue;
    }
    for (const auto& m : r.measurements) {
      out << csv::fmt(m.t) << ',' << m.gnb_id << ',' << csv::fmt(m.toa) << ','
          << csv::fmt(m.aoa.degrees()) << ',' << csv::fmt(m.aod.degrees()) << ','
          << csv::fmt(m.rss) << ',';
      if (m.label) out << *m.label;
      if (with_truth) {
        const GroundTruth tr = m.truth.value_or(GroundTruth{r.ue, 0.0});
        out << ',' << csv::fmt(tr.ue.x) << ',' << csv::fmt(tr.ue.y) << ','
            << csv::fmt(tr.path_length);
      }
      out << '\n';
    }
  }
}

struct DatasetFile {
  std::vector<EpochRecord> records;
  bool has_labels{true};
  bool has_truth{false};
};

/// Reads a dataset CSV, regrouping consecutive rows by (t, gnb_id).
inline DatasetFile read_dataset(const std::string& path) {
  const auto table = csv::read(path);
  const auto ct = table.require("t");
  const auto cg = table.require("gnb_id");
  const auto ctoa = table.require("toa_s");
  const auto caoa = table.require("aoa_deg");
  const auto caod = table.require("aod_deg");
  const auto crss = table.require("rss_dbm");
  const auto clabel = table.column("label");
  const auto cux = table.column("ue_x");
  const auto cuy = table.column("ue_y");
  const auto clen = table.column("path_len_m");
  DatasetFile file;
  file.has_truth = cux && cuy;
  file.has_labels = clabel.has_value();

  std::uint64_t epoch = 0;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const double t = table.number(i, ct);
    const int gnb = static_cast<int>(table.integer(i, cg));
    Point2 ue{};
    if (file.has_truth) ue = {table.number(i, *cux), table.number(i, *cuy)};
    if (file.records.empty() || file.records.back().t != t || file.records.back().gnb_id != gnb) {
      if (!file.records.empty() && file.records.back().t != t) ++epoch;
      EpochRecord rec;
      rec.epoch = epoch;
      rec.t = t;
      rec.gnb_id = gnb;
      rec.ue = ue;
      file.records.push_back(std::move(rec));
    }
    if (table.empty_cell(i, ctoa)) continue;  // outage marker
    Measurement m;
    m.t = t;
    m.gnb_id = gnb;
    m.path_index = static_cast<int>(file.records.back().measurements.size());
    m.toa = table.number(i, ctoa);
    m.aoa = Bearing(table.number(i, caoa));
    m.aod = Bearing(table.number(i, caod));
    m.rss = table.number(i, crss);
    if (clabel && !table.empty_cell(i, *clabel)) {
      m.label = static_cast<int>(table.integer(i, *clabel));
    } else {
      file.has_labels = false;
    }
    if (file.has_truth) {
      m.truth = GroundTruth{ue, clen && !table.empty_cell(i, *clen) ? table.number(i, *clen) : 0.0};
    }
    file.records.back().measurements.push_back(std::move(m));
  }
  return file;
}

}  // namespace oori
