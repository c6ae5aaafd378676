#pragma once
// UE positioning from LoS and single-bounce reflection (SBR) paths.
//
// Angle roles follow the geometry of a single bounce:
//   beta  - departure bearing at the gNB, toward the scatterer (AoD);
//   alpha - bearing at the UE, toward the scatterer (AoA).
// With d the total path length and r the gNB-scatterer distance,
//   scatterer = p_b + r (sin beta, cos beta)
//   ue        = scatterer - (d - r) (sin alpha, cos alpha),
// so every r in (0, d) gives a candidate UE and the candidates form a line.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <ostream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "oori/channel.hpp"
#include "oori/classifier.hpp"
#include "oori/csv.hpp"
#include "oori/errors.hpp"
#include "oori/geometry.hpp"
#include "oori/scene.hpp"

namespace oori {

struct Point3 {
  double x{0.0};
  double y{0.0};
  double z{0.0};
};

struct SphericalObs {
  double range{0.0};  ///< 3D distance gNB-UE, meters
  Bearing azimuth;
  double elevation_deg{0.0};
};

inline Point3 spherical_to_cartesian_3d(const GnbSite& gnb, const SphericalObs& obs) {
  if (!(obs.range > 0.0)) throw DomainError("range must be positive");
  if (!(obs.elevation_deg > -90.0 && obs.elevation_deg < 90.0)) {
    throw DomainError("elevation must lie in (-90, 90) degrees");
  }
  const double a = obs.azimuth.radians();
  const double phi = deg_to_rad(obs.elevation_deg);
  return {gnb.position.x + obs.range * std::sin(a) * std::cos(phi),
          gnb.position.y + obs.range * std::cos(a) * std::cos(phi),
          gnb.height + obs.range * std::sin(phi)};
}

/// Horizontal range from a 3D range and a known height difference.
inline double horizontal_range(double range_3d, double delta_z) {
  if (!(range_3d > std::abs(delta_z))) {
    throw DomainError("range does not exceed the height difference");
  }
  return std::sqrt(range_3d * range_3d - delta_z * delta_z);
}

/// 2D LoS fix from 3D range and the bearing gNB -> UE, given the UE height.
inline Point2 los_position_2d(const GnbSite& gnb, double range_3d, Bearing alpha,
                              double ue_height) {
  const double d = horizontal_range(range_3d, gnb.height - ue_height);
  return gnb.position + alpha.unit() * d;
}

inline Point2 scatterer_point(const Point2& gnb, Bearing beta, double r) {
  if (!(r >= 0.0)) throw DomainError("scatterer distance must be >= 0");
  return gnb + beta.unit() * r;
}

/// The line of UE positions consistent with one bounce of total length d:
/// it joins the r = 0 and r = d candidates.
inline Line sbr_line(const Point2& gnb, Bearing alpha, Bearing beta, double d) {
  if (!(d > 0.0)) throw DomainError("path length must be positive");
  const Point2 p0 = gnb - alpha.unit() * d;
  const Point2 p1 = gnb + beta.unit() * d;
  if (distance(p0, p1) <= 1e-12 * std::max(1.0, d)) {
    throw DegenerateGeometry("departure and arrival bearings are opposite");
  }
  return Line::through(p0, p1);
}

/// Slope-intercept form of the same line, y = k x + b. Undefined (nullopt)
/// when sin(alpha) + sin(beta) vanishes, i.e. the line is vertical.
inline std::optional<std::pair<double, double>> sbr_slope_intercept(const Point2& gnb,
                                                                    Bearing alpha, Bearing beta,
                                                                    double d, double eps = 1e-12) {
  const double sa = std::sin(alpha.radians());
  const double ca = std::cos(alpha.radians());
  const double sb = std::sin(beta.radians());
  const double cb = std::cos(beta.radians());
  if (std::abs(sa + sb) <= eps) return std::nullopt;
  const double k = (ca + cb) / (sa + sb);
  const double b = -k * (gnb.x - d * sa) + gnb.y - d * ca;
  return std::pair{k, b};
}

/// Line for a measured single-bounce path.
inline Line sbr_line(const GnbSite& gnb, const Measurement& m, double ue_height) {
  const double d = horizontal_range(m.toa * kSpeedOfLight, gnb.height - ue_height);
  return sbr_line(gnb.position, m.aoa, m.aod, d);
}

/// Intersection of the two measurements' SBR lines.
inline Point2 sbr_position(const GnbSite& gnb, const Measurement& m1, const Measurement& m2,
                           double ue_height) {
  if (m1.gnb_id != m2.gnb_id || m1.t != m2.t) {
    throw DataError("SBR pair must share gNB and epoch");
  }
  return intersect_lines(sbr_line(gnb, m1, ue_height), sbr_line(gnb, m2, ue_height));
}

// ---- filter-then-position pipeline ---------------------------------------

enum class Method { LoS, SBR, FallbackStrongestTwo };
enum class Mode { SbrOnly, LosPreferred };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::LoS:
      return "LoS";
    case Method::SBR:
      return "SBR";
    case Method::FallbackStrongestTwo:
      return "FallbackStrongestTwo";
  }
  return "?";
}

inline std::string to_string(Mode m) { return m == Mode::SbrOnly ? "sbr" : "los"; }

struct PositionFix {
  double t{0.0};
  int gnb_id{0};
  Point2 p;
  Method method{Method::SBR};
  std::vector<int> contributing;  ///< path indices within the epoch
};

struct Outage {
  double t{0.0};
  int gnb_id{0};
  std::string reason;
};

using StepResult = std::variant<PositionFix, Outage>;

struct PipelineOptions {
  Mode mode{Mode::SbrOnly};
  /// Pairs whose lines cross at less than this angle are skipped.
  double min_crossing_angle_deg{15.0};
};

namespace detail {

/// Indices of `ms` ordered by RSS descending, ties by lower path index.
inline std::vector<std::size_t> rss_rank(std::span<const Measurement> ms,
                                         const std::vector<std::size_t>& subset) {
  std::vector<std::size_t> order = subset;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (ms[a].rss != ms[b].rss) return ms[a].rss > ms[b].rss;
    return ms[a].path_index < ms[b].path_index;
  });
  return order;
}

}  // namespace detail

/// Highest-RSS pair among `candidates` whose SBR lines intersect at no less
/// than `min_angle_deg`; pairs are tried in (first, second) rank order.
inline std::optional<PositionFix> position_strongest_pair(std::span<const Measurement> ms,
                                                          const std::vector<std::size_t>& candidates,
                                                          const GnbSite& gnb, double ue_height,
                                                          double min_angle_deg, Method method) {
  const auto order = detail::rss_rank(ms, candidates);
  std::vector<std::optional<Line>> lines(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    try {
      lines[i] = sbr_line(gnb, ms[order[i]], ue_height);
    } catch (const Error&) {
    }
  }
  const double min_sin = std::sin(deg_to_rad(std::clamp(min_angle_deg, 0.0, 90.0)));
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (!lines[i]) continue;
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      if (!lines[j]) continue;
      const double s = std::abs(lines[i]->nx() * lines[j]->ny() - lines[i]->ny() * lines[j]->nx());
      if (s < min_sin || s < kParallelEps) continue;
      const auto& a = ms[order[i]];
      const auto& b = ms[order[j]];
      return PositionFix{a.t, a.gnb_id, intersect_lines(*lines[i], *lines[j]), method,
                         {a.path_index, b.path_index}};
    }
  }
  return std::nullopt;
}

namespace detail {

/// Strongest usable pair among `preferred` (method SBR), else among all paths.
inline StepResult pair_or_fallback(std::span<const Measurement> ms,
                                   const std::vector<std::size_t>& preferred, const GnbSite& gnb,
                                   double ue_height, const PipelineOptions& opts) {
  if (ms.empty()) return Outage{0.0, gnb.id, "no paths"};
  const double t = ms.front().t;
  if (preferred.size() >= 2) {
    if (auto fix = position_strongest_pair(ms, preferred, gnb, ue_height,
                                           opts.min_crossing_angle_deg, Method::SBR)) {
      return *fix;
    }
  }
  std::vector<std::size_t> all(ms.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  if (all.size() < 2) return Outage{t, ms.front().gnb_id, "fewer than two paths"};
  if (auto fix = position_strongest_pair(ms, all, gnb, ue_height, opts.min_crossing_angle_deg,
                                         Method::FallbackStrongestTwo)) {
    return *fix;
  }
  return Outage{t, ms.front().gnb_id, "no usable path pair"};
}

}  // namespace detail

template <class Classify>
StepResult pipeline_step(std::span<const Measurement> ms, Classify&& classify, const GnbSite& gnb,
                         double ue_height, const PipelineOptions& opts = {}) {
  if (ms.empty()) return Outage{0.0, gnb.id, "no paths"};
  const double t = ms.front().t;
  for (const auto& m : ms) {
    if (m.t != t || m.gnb_id != ms.front().gnb_id) {
      throw DataError("pipeline step input spans several epochs or gNBs");
    }
  }
  std::vector<int> predicted(ms.size());
  for (std::size_t i = 0; i < ms.size(); ++i) predicted[i] = classify(ms[i]);

  auto with_order = [&](int order) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < ms.size(); ++i) {
      if (predicted[i] == order) idx.push_back(i);
    }
    return idx;
  };

  if (opts.mode == Mode::LosPreferred) {
    const auto los = detail::rss_rank(ms, with_order(0));
    if (!los.empty()) {
      const auto& m = ms[los.front()];
      try {
        const Point2 p = los_position_2d(gnb, m.toa * kSpeedOfLight, m.aod, ue_height);
        return PositionFix{t, m.gnb_id, p, Method::LoS, {m.path_index}};
      } catch (const DomainError&) {
      }
    }
  }

  return detail::pair_or_fallback(ms, with_order(1), gnb, ue_height, opts);
}

/// Unfiltered baseline: the strongest usable pair among all paths.
inline StepResult baseline_strongest_two(std::span<const Measurement> ms, const GnbSite& gnb,
                                         double ue_height, const PipelineOptions& opts = {}) {
  return detail::pair_or_fallback(ms, {}, gnb, ue_height, opts);
}

/// RSS-threshold baseline: paths within `threshold_db` of the strongest take
/// the place of the predicted SBRs; the fallback is unchanged.
inline StepResult baseline_rss_threshold(std::span<const Measurement> ms, double threshold_db,
                                         const GnbSite& gnb, double ue_height,
                                         const PipelineOptions& opts = {}) {
  if (ms.empty()) return Outage{0.0, gnb.id, "no paths"};
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& m : ms) best = std::max(best, m.rss);
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < ms.size(); ++i) {
    if (ms[i].rss >= best - threshold_db) kept.push_back(i);
  }
  return detail::pair_or_fallback(ms, kept, gnb, ue_height, opts);
}

// ---- fixes file ------------------------------------------------------------
//
// t,gnb_id,method,x_est,y_est,x_true,y_true,err_m
// Outage epochs carry method "Outage" and empty estimate and error cells.

struct FixRow {
  double t{0.0};
  int gnb_id{0};
  std::optional<Method> method;  ///< nullopt for an outage
  Point2 est;
  Point2 truth;
  double err{0.0};
};

inline Method parse_method(std::string_view s) {
  if (s == "LoS") return Method::LoS;
  if (s == "SBR") return Method::SBR;
  if (s == "FallbackStrongestTwo") return Method::FallbackStrongestTwo;
  throw DataError("unknown positioning method '" + std::string(s) + "'");
}

inline FixRow to_fix_row(const StepResult& r, double t, int gnb_id, const Point2& truth) {
  FixRow row{t, gnb_id, std::nullopt, {}, truth, 0.0};
  if (const auto* f = std::get_if<PositionFix>(&r)) {
    row.method = f->method;
    row.est = f->p;
    row.err = distance(f->p, truth);
  }
  return row;
}

inline void write_fixes(std::ostream& out, const std::vector<FixRow>& rows) {
  out << "t,gnb_id,method,x_est,y_est,x_true,y_true,err_m\n";
  for (const auto& r : rows) {
    out << csv::fmt(r.t) << ',' << r.gnb_id << ',';
    if (r.method) {
      out << to_string(*r.method) << ',' << csv::fmt(r.est.x) << ',' << csv::fmt(r.est.y) << ','
          << csv::fmt(r.truth.x) << ',' << csv::fmt(r.truth.y) << ',' << csv::fmt(r.err) << '\n';
    } else {
      out << "Outage,,," << csv::fmt(r.truth.x) << ',' << csv::fmt(r.truth.y) << ",\n";
    }
  }
}

inline std::vector<FixRow> read_fixes(const std::string& path) {
  const auto table = csv::read(path);
  const auto ct = table.require("t");
  const auto cg = table.require("gnb_id");
  const auto cm = table.require("method");
  const auto cxe = table.require("x_est");
  const auto cye = table.require("y_est");
  const auto cxt = table.require("x_true");
  const auto cyt = table.require("y_true");
  const auto ce = table.require("err_m");
  std::vector<FixRow> out;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    FixRow r;
    r.t = table.number(i, ct);
    r.gnb_id = static_cast<int>(table.integer(i, cg));
    r.truth = {table.number(i, cxt), table.number(i, cyt)};
    const std::string& m = table.rows[i][cm];
    if (m != "Outage") {
      try {
        r.method = parse_method(m);
      } catch (const DataError& e) {
        table.fail(i, e.what());
      }
      r.est = {table.number(i, cxe), table.number(i, cye)};
      r.err = table.number(i, ce);
      if (!(r.err >= 0.0)) table.fail(i, "negative error");
    }
    out.push_back(r);
  }
  return out;
}

/// Classifier adapters for pipeline_step.
inline auto ensemble_classifier(const Ensemble& e) {
  return [&e](const Measurement& m) { return e.predict(to_feature_row(m).features).cls; };
}

inline auto oracle_classifier() {
  return [](const Measurement& m) {
    if (!m.label) throw DataError("oracle classifier needs labeled measurements");
    return *m.label;
  };
}

}  // namespace oori
