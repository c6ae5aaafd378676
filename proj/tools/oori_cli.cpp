// oori: batch front end. Every command reads a flat key=value config file
// (optional) and command-line overrides; data goes to files and stdout,
// diagnostics to stderr.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "oori/channel.hpp"
#include "oori/classifier.hpp"
#include "oori/evaluation.hpp"
#include "oori/positioning.hpp"
#include "oori/scenario.hpp"
#include "oori/scene.hpp"

namespace {

using namespace oori;

struct RunConfig {
  std::string scene_path{"scene.json"};
  std::string trajectory_path{"trajectory.csv"};
  std::string dataset_path{"dataset.csv"};
  std::string model_path{"model.txt"};
  std::string out_dir{"out"};

  std::string scene_kind{"manhattan-block"};
  SceneParams scene;
  double step{1.0};
  double speed{10.0};
  double ue_height{1.5};

  std::uint64_t seed{1};
  int max_order{kDefaultMaxOrder};
  std::uint64_t target_rows{200000};
  bool with_truth{true};
  RadioConfig radio;
  NoiseModel noise;

  int n_trees{14};
  int max_depth{20};
  int min_leaf_size{5};
  int folds{5};
  bool bootstrap{true};

  std::string mode{"both"};
  double threshold_db{10.0};
  double min_crossing_angle_deg{15.0};
  bool oracle{false};
  unsigned threads{0};

  [[nodiscard]] unsigned workers() const {
    return threads > 0 ? threads : std::max(1u, std::thread::hardware_concurrency());
  }
};

// ---- config file -----------------------------------------------------------

template <class T>
T parse_value(const std::string& s) {
  if constexpr (std::is_same_v<T, std::string>) {
    return s;
  } else if constexpr (std::is_same_v<T, bool>) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError("expected a boolean, got '" + s + "'");
  } else {
    T v{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
      throw ConfigError("expected a number, got '" + s + "'");
    }
    return v;
  }
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

template <class T>
Setter set_field(T RunConfig::*field) {
  return [field](RunConfig& c, const std::string& v) { c.*field = parse_value<T>(v); };
}

template <class T>
Setter set_scene_field(T SceneParams::*field) {
  return [field](RunConfig& c, const std::string& v) { c.scene.*field = parse_value<T>(v); };
}

const std::map<std::string, Setter>& config_keys() {
  static const std::map<std::string, Setter> keys{
      {"scene", set_field(&RunConfig::scene_path)},
      {"trajectory", set_field(&RunConfig::trajectory_path)},
      {"dataset", set_field(&RunConfig::dataset_path)},
      {"model", set_field(&RunConfig::model_path)},
      {"out_dir", set_field(&RunConfig::out_dir)},
      {"scene_kind", set_field(&RunConfig::scene_kind)},
      {"length", set_scene_field(&SceneParams::length)},
      {"gnb_spacing", set_scene_field(&SceneParams::gnb_spacing)},
      {"lateral_offset", set_scene_field(&SceneParams::lateral_offset)},
      {"gnb_height", set_scene_field(&SceneParams::gnb_height)},
      {"street_width", set_scene_field(&SceneParams::street_width)},
      {"wall_loss_db", set_scene_field(&SceneParams::wall_loss_db)},
      {"block_length", set_scene_field(&SceneParams::block_length)},
      {"block_depth", set_scene_field(&SceneParams::block_depth)},
      {"cross_street", set_scene_field(&SceneParams::cross_street)},
      {"rows", set_scene_field(&SceneParams::rows)},
      {"cols", set_scene_field(&SceneParams::cols)},
      {"yaw_jitter_deg", set_scene_field(&SceneParams::yaw_jitter_deg)},
      {"setback_max", set_scene_field(&SceneParams::setback_max)},
      {"step", set_field(&RunConfig::step)},
      {"speed", set_field(&RunConfig::speed)},
      {"ue_height", set_field(&RunConfig::ue_height)},
      {"seed", set_field(&RunConfig::seed)},
      {"max_order", set_field(&RunConfig::max_order)},
      {"target_rows", set_field(&RunConfig::target_rows)},
      {"with_truth", set_field(&RunConfig::with_truth)},
      {"carrier_hz", [](RunConfig& c, const std::string& v) { c.radio.carrier_hz = parse_value<double>(v); }},
      {"bandwidth_hz", [](RunConfig& c, const std::string& v) { c.radio.bandwidth_hz = parse_value<double>(v); }},
      {"tx_power_dbm", [](RunConfig& c, const std::string& v) { c.radio.tx_power_dbm = parse_value<double>(v); }},
      {"sigma_range", [](RunConfig& c, const std::string& v) { c.noise.sigma_range = parse_value<double>(v); }},
      {"sigma_angle", [](RunConfig& c, const std::string& v) { c.noise.sigma_angle = parse_value<double>(v); }},
      {"sigma_rss", [](RunConfig& c, const std::string& v) { c.noise.sigma_rss = parse_value<double>(v); }},
      {"n_trees", set_field(&RunConfig::n_trees)},
      {"max_depth", set_field(&RunConfig::max_depth)},
      {"min_leaf_size", set_field(&RunConfig::min_leaf_size)},
      {"folds", set_field(&RunConfig::folds)},
      {"bootstrap", set_field(&RunConfig::bootstrap)},
      {"mode", set_field(&RunConfig::mode)},
      {"threshold_db", set_field(&RunConfig::threshold_db)},
      {"min_crossing_angle_deg", set_field(&RunConfig::min_crossing_angle_deg)},
      {"oracle", set_field(&RunConfig::oracle)},
      {"threads", set_field(&RunConfig::threads)},
  };
  return keys;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

void load_config(const std::string& path, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = path + ":" + std::to_string(lineno) + ": ";
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = config_keys().find(key);
    if (it == config_keys().end()) throw ConfigError(where + "unknown key '" + key + "'");
    try {
      it->second(cfg, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + key + ": " + e.what());
    }
  }
}

/// Flags shared by every subcommand; unset ones leave the config alone.
struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> max_order;
  std::optional<int> n_trees;
  std::optional<std::string> mode;
  std::optional<double> sigma_range;
  std::optional<double> sigma_angle;
  std::optional<double> sigma_rss;
  std::optional<double> threshold_db;
  std::optional<unsigned> threads;

  void attach(CLI::App* app) {
    app->add_option("-c,--config", config, "key = value config file");
    app->add_option("--seed", seed, "master seed");
    app->add_option("--max-order", max_order, "highest reflection order traced");
    app->add_option("--n-trees", n_trees, "trees in the bagged ensemble");
    app->add_option("--mode", mode, "positioning mode: sbr, los or both");
    app->add_option("--noise-sigma-range", sigma_range, "range noise sigma, meters");
    app->add_option("--noise-sigma-angle", sigma_angle, "AoA/AoD noise sigma, degrees");
    app->add_option("--noise-sigma-rss", sigma_rss, "RSS noise sigma, dB");
    app->add_option("--threshold-db", threshold_db, "RSS-threshold baseline window, dB");
    app->add_option("--threads", threads, "worker threads (0 = all cores)");
  }

  [[nodiscard]] RunConfig resolve() const {
    RunConfig cfg;
    if (!config.empty()) load_config(config, cfg);
    if (seed) cfg.seed = *seed;
    if (max_order) cfg.max_order = *max_order;
    if (n_trees) cfg.n_trees = *n_trees;
    if (mode) cfg.mode = *mode;
    if (sigma_range) cfg.noise.sigma_range = *sigma_range;
    if (sigma_angle) cfg.noise.sigma_angle = *sigma_angle;
    if (sigma_rss) cfg.noise.sigma_rss = *sigma_rss;
    if (threshold_db) cfg.threshold_db = *threshold_db;
    if (threads) cfg.threads = *threads;
    cfg.noise.seed = cfg.seed;
    cfg.scene.seed = cfg.seed;
    if (cfg.mode != "sbr" && cfg.mode != "los" && cfg.mode != "both") {
      throw ConfigError("mode must be sbr, los or both");
    }
    return cfg;
  }
};

// ---- helpers ---------------------------------------------------------------

std::ofstream open_out(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path + " for writing");
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
}

std::size_t row_count(const std::vector<TracedEpoch>& traced) {
  std::size_t n = 0;
  for (const auto& te : traced) n += te.paths.size();
  return n;
}

/// UE height at time t, interpolated along the trajectory.
double height_at(const std::vector<TrajectoryPoint>& traj, double t) {
  auto it = std::lower_bound(traj.begin(), traj.end(), t,
                             [](const TrajectoryPoint& p, double v) { return p.t < v; });
  if (it == traj.begin()) return traj.front().z;
  if (it == traj.end()) return traj.back().z;
  if (it->t == t) return it->z;
  const auto& a = *(it - 1);
  const auto& b = *it;
  return a.z + (t - a.t) / (b.t - a.t) * (b.z - a.z);
}

std::string fixed(double v, int prec) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(prec) << v;
  return os.str();
}

std::vector<FeatureRow> labeled_rows(const DatasetFile& file, const std::string& path) {
  if (!file.has_labels) throw DataError(path + ": dataset has unlabeled rows");
  auto rows = to_feature_rows(flatten(file.records));
  if (rows.empty()) throw DataError(path + ": dataset has no measurement rows");
  return rows;
}

int class_count(const std::vector<FeatureRow>& rows) {
  int mx = 0;
  for (const auto& r : rows) mx = std::max(mx, *r.label);
  return mx + 1;
}

// ---- report rendering --------------------------------------------------------

struct FixSet {
  std::string name;
  std::vector<FixRow> rows;
};

std::vector<double> errors_of(const std::vector<FixRow>& rows, bool skip_fallback) {
  std::vector<double> e;
  for (const auto& r : rows) {
    if (!r.method) continue;
    if (skip_fallback && *r.method == Method::FallbackStrongestTwo) continue;
    e.push_back(r.err);
  }
  return e;
}

std::string stats_section(const std::string& title, const std::vector<FixSet>& sets,
                          bool skip_fallback, std::vector<StatColumn>* csv_cols,
                          const std::string& csv_suffix) {
  std::vector<StatColumn> cols;
  std::vector<std::string> empty;
  for (const auto& s : sets) {
    const auto e = errors_of(s.rows, skip_fallback);
    if (e.empty()) {
      empty.push_back(s.name);
      continue;
    }
    cols.emplace_back(s.name, error_stats(e));
    if (csv_cols) csv_cols->emplace_back(s.name + csv_suffix, cols.back().second);
  }
  std::ostringstream os;
  os << title << '\n';
  if (!cols.empty()) os << render_table(cols);
  for (const auto& n : empty) os << n << ": no fixes\n";
  return os.str();
}

std::string availability(const std::vector<FixSet>& sets) {
  std::ostringstream os;
  os << "availability (epochs with a fix / epochs):\n";
  for (const auto& s : sets) {
    std::size_t fixes = 0;
    std::size_t fallback = 0;
    for (const auto& r : s.rows) {
      if (!r.method) continue;
      ++fixes;
      if (*r.method == Method::FallbackStrongestTwo) ++fallback;
    }
    const double pct = s.rows.empty() ? 0.0 : 100.0 * static_cast<double>(fixes) /
                                                  static_cast<double>(s.rows.size());
    os << "  " << s.name << ": " << fixes << " / " << s.rows.size() << " (" << fixed(pct, 1)
       << " %), fallback " << fallback << '\n';
  }
  return os.str();
}

RunResult run_of(const FixSet& s) {
  RunResult r{s.name, {}, {}};
  for (const auto& row : s.rows) {
    if (!row.method) continue;
    r.epochs.push_back(row.t);
    r.errors.push_back(row.err);
  }
  return r;
}

/// Both runs cut down to the epochs where each has a fix.
std::pair<RunResult, RunResult> common_epochs(const FixSet& a, const FixSet& b) {
  std::map<double, double> eb;
  for (const auto& r : b.rows) {
    if (r.method) eb[r.t] = r.err;
  }
  RunResult ra{a.name, {}, {}};
  RunResult rb{b.name, {}, {}};
  for (const auto& r : a.rows) {
    if (!r.method) continue;
    const auto it = eb.find(r.t);
    if (it == eb.end()) continue;
    ra.epochs.push_back(r.t);
    ra.errors.push_back(r.err);
    rb.epochs.push_back(r.t);
    rb.errors.push_back(it->second);
  }
  return {ra, rb};
}

// ---- commands --------------------------------------------------------------

int cmd_gen_scene(const RunConfig& cfg, const std::string& kind_flag) {
  const auto kind = parse_scene_kind(kind_flag.empty() ? cfg.scene_kind : kind_flag);
  const Scene scene = generate_scene(kind, cfg.scene);
  const auto traj =
      straight_trajectory(drive_length(kind, cfg.scene), cfg.step, cfg.speed, cfg.ue_height);
  {
    auto out = open_out(cfg.scene_path);
    out << scene_to_json(scene).dump(2) << '\n';
  }
  {
    auto out = open_out(cfg.trajectory_path);
    write_trajectory(out, traj);
  }
  std::cout << "scene " << cfg.scene_path << ": " << scene.walls().size() << " walls, "
            << scene.gnbs().size() << " gNBs\n"
            << "trajectory " << cfg.trajectory_path << ": " << traj.size() << " points\n";
  return 0;
}

int cmd_gen_dataset(const RunConfig& cfg) {
  const Scene scene = read_scene(cfg.scene_path);
  const auto traj = read_trajectory(cfg.trajectory_path);
  cfg.radio.validate();
  cfg.noise.validate();
  const DatasetOptions opts{cfg.max_order, cfg.workers()};
  auto traced = trace_trajectory(scene, traj, opts);
  std::size_t rows = row_count(traced);
  // densify the drive until the row target is met
  std::size_t points = traj.size();
  for (int round = 0; round < 12 && cfg.target_rows > 0 && rows < cfg.target_rows &&
                      traj.size() >= 2;
       ++round) {
    const double per_point = rows > 0 ? static_cast<double>(rows) / static_cast<double>(points) : 0.0;
    const std::size_t want =
        per_point > 0.0 ? static_cast<std::size_t>(std::ceil(
                              1.02 * static_cast<double>(cfg.target_rows) / per_point))
                        : points * 2;
    points = std::max(want, points + 1);
    traced = trace_trajectory(scene, resample_trajectory(traj, points), opts);
    rows = row_count(traced);
  }
  const auto records = measure_traced(scene, traced, cfg.radio, cfg.noise);
  {
    auto out = open_out(cfg.dataset_path);
    write_dataset(out, records, cfg.with_truth);
  }
  std::map<int, std::size_t> hist;
  std::size_t outages = 0;
  for (const auto& r : records) {
    if (r.outage()) ++outages;
    for (const auto& m : r.measurements) ++hist[*m.label];
  }
  std::cout << "dataset " << cfg.dataset_path << ": " << rows << " rows, " << points
            << " epochs, " << records.size() << " gNB associations, " << outages
            << " outage associations\n";
  for (const auto& [label, n] : hist) std::cout << "  order " << label << ": " << n << '\n';
  return 0;
}

int cmd_train(const RunConfig& cfg, const std::string& metrics_out) {
  const auto file = read_dataset(cfg.dataset_path);
  const auto rows = labeled_rows(file, cfg.dataset_path);
  const int n_classes = class_count(rows);
  const auto split = split_dataset(rows, cfg.seed + 1);
  BaggingParams bp;
  bp.n_trees = cfg.n_trees;
  bp.tree = {cfg.max_depth, cfg.min_leaf_size};
  bp.bootstrap = cfg.bootstrap;
  bp.threads = cfg.workers();
  const auto model = train_bagged(split.train, bp, cfg.seed + 2, n_classes);
  const double val = accuracy(model, split.validation);
  const auto cm = confusion(model, split.test);
  const auto cv = cross_validate(rows, static_cast<std::size_t>(cfg.folds), bp, cfg.seed + 3);
  {
    auto out = open_out(cfg.model_path);
    write_model(out, model);
  }
  std::ostringstream os;
  os << "rows " << rows.size() << " (train " << split.train.size() << ", validation "
     << split.validation.size() << ", test " << split.test.size() << ")\n"
     << "trees " << bp.n_trees << ", classes " << n_classes << '\n'
     << "validation_accuracy " << fixed(100.0 * val, 3) << " %\n"
     << "test_accuracy " << fixed(100.0 * cm.accuracy(), 3) << " %\n"
     << cfg.folds << "-fold cross-validation:";
  for (std::size_t f = 0; f < cv.accuracies.size(); ++f) {
    os << ' ' << fixed(100.0 * cv.accuracies[f], 3);
  }
  os << "\ncv_mean " << fixed(100.0 * cv.mean(), 3) << " %, cv_stddev "
     << fixed(100.0 * cv.stddev(), 3) << " points\n"
     << "test confusion (rows = true order):\n"
     << cm.render();
  std::cout << os.str();
  if (!metrics_out.empty()) write_text(metrics_out, os.str());
  return 0;
}

int cmd_eval_classifier(const RunConfig& cfg, const std::string& out_path) {
  std::ifstream in(cfg.model_path, std::ios::binary);
  if (!in) throw DataError("cannot open model file " + cfg.model_path);
  const auto model = read_model(in);
  const auto file = read_dataset(cfg.dataset_path);
  const auto rows = labeled_rows(file, cfg.dataset_path);
  const auto cm = confusion(model, rows);
  std::ostringstream os;
  os << "rows " << rows.size() << '\n'
     << "accuracy " << fixed(100.0 * cm.accuracy(), 3) << " %\n"
     << "confusion (rows = true order):\n"
     << cm.render() << "order,precision,recall,support\n";
  for (int c = 0; c < cm.n_classes(); ++c) {
    std::uint64_t col = 0;
    std::uint64_t row = 0;
    for (int k = 0; k < cm.n_classes(); ++k) {
      col += cm.at(k, c);
      row += cm.at(c, k);
    }
    const auto ratio = [](std::uint64_t a, std::uint64_t b) {
      return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b);
    };
    os << c << ',' << fixed(ratio(cm.at(c, c), col), 4) << ',' << fixed(ratio(cm.at(c, c), row), 4)
       << ',' << row << '\n';
  }
  // share of true SBR paths the RSS window keeps, for reference
  std::uint64_t sbr = 0;
  std::uint64_t kept_sbr = 0;
  std::uint64_t kept = 0;
  for (const auto& r : file.records) {
    if (r.outage()) continue;
    const auto k = baseline_rss_filter(r.measurements, cfg.threshold_db);
    kept += k.size();
    for (const auto& m : r.measurements) sbr += *m.label == 1;
    for (const auto& m : k) kept_sbr += *m.label == 1;
  }
  os << "rss window " << fixed(cfg.threshold_db, 1) << " dB keeps " << kept << " paths, "
     << kept_sbr << " of " << sbr << " single-bounce paths\n";
  std::cout << os.str();
  if (!out_path.empty()) write_text(out_path, os.str());
  return 0;
}

int cmd_position(const RunConfig& cfg) {
  const Scene scene = read_scene(cfg.scene_path);
  const auto traj = read_trajectory(cfg.trajectory_path);
  for (std::size_t i = 1; i < traj.size(); ++i) {
    if (!(traj[i].t > traj[i - 1].t)) throw DataError(cfg.trajectory_path + ": t must increase");
  }
  const auto file = read_dataset(cfg.dataset_path);
  if (!file.has_truth) throw DataError(cfg.dataset_path + ": dataset lacks truth columns");
  if (cfg.oracle && !file.has_labels) throw DataError("oracle labels need a labeled dataset");
  std::optional<Ensemble> model;
  if (!cfg.oracle) {
    std::ifstream in(cfg.model_path, std::ios::binary);
    if (!in) throw DataError("cannot open model file " + cfg.model_path);
    model = read_model(in);
  }
  std::vector<Mode> modes;
  if (cfg.mode != "los") modes.push_back(Mode::SbrOnly);
  if (cfg.mode != "sbr") modes.push_back(Mode::LosPreferred);
  const PipelineOptions sbr_opts{Mode::SbrOnly, cfg.min_crossing_angle_deg};

  // per record: one fix row per mode, then the two baselines
  const auto& recs = file.records;
  const std::size_t n_out = modes.size() + 2;
  std::vector<std::vector<FixRow>> results(recs.size());
  std::vector<int> ranks(recs.size(), 0);
  std::vector<int> true_sbr(recs.size(), 0);
  parallel_for(recs.size(), cfg.workers(), [&](std::size_t i) {
    const auto& r = recs[i];
    ranks[i] = association_rank(scene, r.ue, r.gnb_id);
    if (ranks[i] == 0) return;
    const GnbSite& g = scene.gnb(r.gnb_id);
    const double z = height_at(traj, r.t);
    std::span<const Measurement> ms(r.measurements);
    std::vector<int> pred(ms.size());
    for (std::size_t k = 0; k < ms.size(); ++k) {
      pred[k] = model ? model->predict(to_feature_row(ms[k]).features).cls : ms[k].label.value();
      if (ms[k].label && *ms[k].label == 1) ++true_sbr[i];
    }
    auto classify = [&pred](const Measurement& m) { return pred[m.path_index]; };
    for (Mode mode : modes) {
      PipelineOptions opts{mode, cfg.min_crossing_angle_deg};
      results[i].push_back(to_fix_row(pipeline_step(ms, classify, g, z, opts), r.t, r.gnb_id, r.ue));
    }
    results[i].push_back(to_fix_row(baseline_strongest_two(ms, g, z, sbr_opts), r.t, r.gnb_id, r.ue));
    results[i].push_back(to_fix_row(baseline_rss_threshold(ms, cfg.threshold_db, g, z, sbr_opts),
                                    r.t, r.gnb_id, r.ue));
  });

  std::vector<std::string> run_names;
  for (Mode m : modes) run_names.push_back(m == Mode::SbrOnly ? "SBR" : "LoS");
  run_names.push_back("strongest2");
  run_names.push_back("rss" + csv::fmt(cfg.threshold_db) + "dB");
  std::vector<std::string> file_tags;
  for (Mode m : modes) file_tags.push_back(to_string(m));
  file_tags.push_back("strongest2");
  file_tags.push_back("rss");

  // sets[rank - 1][run]
  std::vector<std::vector<FixSet>> sets(2, std::vector<FixSet>(n_out));
  std::vector<std::vector<FixSet>> sbr_epochs(2, std::vector<FixSet>(modes.size()));
  for (int rank = 1; rank <= 2; ++rank) {
    for (std::size_t k = 0; k < n_out; ++k) {
      sets[rank - 1][k].name = "gNB" + std::to_string(rank) + " " + run_names[k];
    }
    for (std::size_t k = 0; k < modes.size(); ++k) {
      sbr_epochs[rank - 1][k].name = sets[rank - 1][k].name;
    }
  }
  for (std::size_t i = 0; i < recs.size(); ++i) {
    if (ranks[i] < 1 || ranks[i] > 2) continue;
    for (std::size_t k = 0; k < n_out; ++k) sets[ranks[i] - 1][k].rows.push_back(results[i][k]);
    if (true_sbr[i] >= 2) {
      for (std::size_t k = 0; k < modes.size(); ++k) {
        sbr_epochs[ranks[i] - 1][k].rows.push_back(results[i][k]);
      }
    }
  }

  std::filesystem::create_directories(cfg.out_dir);
  const std::filesystem::path dir(cfg.out_dir);
  for (int rank = 1; rank <= 2; ++rank) {
    for (std::size_t k = 0; k < n_out; ++k) {
      const std::string stem = "gnb" + std::to_string(rank) + "_" + file_tags[k];
      {
        auto out = open_out((dir / ("fixes_" + stem + ".csv")).string());
        write_fixes(out, sets[rank - 1][k].rows);
      }
      const auto e = errors_of(sets[rank - 1][k].rows, false);
      if (!e.empty()) {
        auto out = open_out((dir / ("cdf_" + stem + ".csv")).string());
        write_cdf(out, cdf_points(e));
      }
    }
  }

  // gNB1 and gNB2 columns, one per mode
  std::vector<FixSet> table;
  for (int rank = 1; rank <= 2; ++rank) {
    for (std::size_t k = modes.size(); k-- > 0;) table.push_back(sets[rank - 1][k]);
  }
  std::vector<FixSet> table_sbr;
  for (int rank = 1; rank <= 2; ++rank) {
    for (std::size_t k = modes.size(); k-- > 0;) table_sbr.push_back(sbr_epochs[rank - 1][k]);
  }
  std::vector<StatColumn> csv_cols;
  std::ostringstream os;
  os << stats_section("2D positioning error, all fixes", table, false, &csv_cols, "") << '\n'
     << stats_section("2D positioning error, excluding fallback fixes", table, true, &csv_cols,
                      " excl fallback")
     << '\n';
  if (file.has_labels) {
    os << stats_section("2D positioning error, epochs with >= 2 true single-bounce paths",
                        table_sbr, false, &csv_cols, " true-sbr epochs")
       << '\n';
  }
  os << availability(table) << '\n';
  if (std::find(modes.begin(), modes.end(), Mode::SbrOnly) != modes.end()) {
    os << "baselines against the SBR pipeline (common epochs):\n";
    for (int rank = 1; rank <= 2; ++rank) {
      const auto& runs = sets[rank - 1];
      for (std::size_t k = modes.size(); k < n_out; ++k) {
        auto [a, b] = common_epochs(runs[0], runs[k]);
        if (a.errors.empty()) {
          os << runs[0].name << " vs " << runs[k].name << ": no common fixes\n";
          continue;
        }
        os << compare_runs(a, b).text() << '\n';
      }
    }
  }
  write_text((dir / "report.txt").string(), os.str());
  write_text((dir / "report.csv").string(), render_table_csv(csv_cols));
  std::cout << os.str();
  return 0;
}

int cmd_report(const std::vector<std::string>& fixes, bool compare, const std::string& out_path,
               const std::string& csv_path) {
  std::vector<FixSet> sets;
  for (const auto& f : fixes) sets.push_back({std::filesystem::path(f).stem().string(), read_fixes(f)});
  std::vector<StatColumn> csv_cols;
  std::ostringstream os;
  os << stats_section("2D positioning error, all fixes", sets, false, &csv_cols, "") << '\n'
     << stats_section("2D positioning error, excluding fallback fixes", sets, true, &csv_cols,
                      " excl fallback")
     << '\n'
     << availability(sets);
  if (compare) {
    if (sets.size() != 2) throw ConfigError("--compare needs exactly two fixes files");
    const auto c = compare_runs(run_of(sets[0]), run_of(sets[1]));
    os << '\n' << c.text();
  }
  std::cout << os.str();
  if (!out_path.empty()) write_text(out_path, os.str());
  if (!csv_path.empty()) write_text(csv_path, render_table_csv(csv_cols));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"oori: reflection-order identification and single-bounce positioning"};
  app.require_subcommand(1);

  Overrides gs_o, gd_o, tr_o, ev_o, po_o;
  std::string kind, scene_out, traj_out;
  auto* gen_scene = app.add_subcommand("gen-scene", "write a built-in scene and its UE drive");
  gs_o.attach(gen_scene);
  gen_scene->add_option("--kind", kind, "corridor, grid or manhattan-block");
  gen_scene->add_option("-o,--out", scene_out, "scene JSON path");
  gen_scene->add_option("--trajectory-out", traj_out, "trajectory CSV path");

  std::string gd_scene, gd_traj, gd_out;
  std::optional<std::uint64_t> gd_rows;
  bool gd_no_truth = false;
  auto* gen_dataset = app.add_subcommand("gen-dataset", "trace paths and write a labeled dataset");
  gd_o.attach(gen_dataset);
  gen_dataset->add_option("--scene", gd_scene, "scene JSON");
  gen_dataset->add_option("--trajectory", gd_traj, "trajectory CSV");
  gen_dataset->add_option("-o,--out", gd_out, "dataset CSV path");
  gen_dataset->add_option("--rows", gd_rows, "row target (0 = trajectory as given)");
  gen_dataset->add_flag("--no-truth", gd_no_truth, "omit ground-truth columns");

  std::string tr_data, tr_model, tr_metrics;
  auto* train = app.add_subcommand("train", "train the bagged tree ensemble");
  tr_o.attach(train);
  train->add_option("--dataset", tr_data, "labeled dataset CSV");
  train->add_option("--model-out", tr_model, "model file path");
  train->add_option("--metrics-out", tr_metrics, "also write the metrics here");

  std::string ev_data, ev_model, ev_out;
  auto* eval = app.add_subcommand("eval-classifier", "score a model on a labeled dataset");
  ev_o.attach(eval);
  eval->add_option("--dataset", ev_data, "labeled dataset CSV");
  eval->add_option("--model", ev_model, "model file");
  eval->add_option("-o,--out", ev_out, "also write the report here");

  std::string po_scene, po_traj, po_data, po_model, po_dir;
  bool po_oracle = false;
  auto* position = app.add_subcommand("position", "filter paths and position the UE per epoch");
  po_o.attach(position);
  position->add_option("--scene", po_scene, "scene JSON");
  position->add_option("--trajectory", po_traj, "trajectory CSV (UE heights)");
  position->add_option("--dataset", po_data, "dataset CSV with truth columns");
  position->add_option("--model", po_model, "model file");
  position->add_option("--out-dir", po_dir, "output directory");
  position->add_flag("--oracle", po_oracle, "use the dataset labels instead of a model");

  std::vector<std::string> rp_fixes;
  bool rp_compare = false;
  std::string rp_out, rp_csv;
  auto* report = app.add_subcommand("report", "error statistics of fixes files");
  report->add_option("fixes", rp_fixes, "fixes CSV files")->required();
  report->add_flag("--compare", rp_compare, "side-by-side comparison of two runs");
  report->add_option("-o,--out", rp_out, "also write the text report here");
  report->add_option("--csv-out", rp_csv, "CSV statistics path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, std::cerr, std::cerr);
  }

  auto set = [](std::string& field, const std::string& v) {
    if (!v.empty()) field = v;
  };
  try {
    if (*gen_scene) {
      auto cfg = gs_o.resolve();
      set(cfg.scene_path, scene_out);
      set(cfg.trajectory_path, traj_out);
      return cmd_gen_scene(cfg, kind);
    }
    if (*gen_dataset) {
      auto cfg = gd_o.resolve();
      set(cfg.scene_path, gd_scene);
      set(cfg.trajectory_path, gd_traj);
      set(cfg.dataset_path, gd_out);
      if (gd_rows) cfg.target_rows = *gd_rows;
      if (gd_no_truth) cfg.with_truth = false;
      return cmd_gen_dataset(cfg);
    }
    if (*train) {
      auto cfg = tr_o.resolve();
      set(cfg.dataset_path, tr_data);
      set(cfg.model_path, tr_model);
      return cmd_train(cfg, tr_metrics);
    }
    if (*eval) {
      auto cfg = ev_o.resolve();
      set(cfg.dataset_path, ev_data);
      set(cfg.model_path, ev_model);
      return cmd_eval_classifier(cfg, ev_out);
    }
    if (*position) {
      auto cfg = po_o.resolve();
      set(cfg.scene_path, po_scene);
      set(cfg.trajectory_path, po_traj);
      set(cfg.dataset_path, po_data);
      set(cfg.model_path, po_model);
      set(cfg.out_dir, po_dir);
      if (po_oracle) cfg.oracle = true;
      return cmd_position(cfg);
    }
    if (*report) return cmd_report(rp_fixes, rp_compare, rp_out, rp_csv);
  } catch (const std::exception& e) {
    std::cerr << "oori: error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
