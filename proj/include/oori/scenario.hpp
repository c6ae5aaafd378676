#pragma once
// Built-in street scenes. Every kind runs a straight drive along y = 0 from
// x = 0 to x = length, with gNBs every `gnb_spacing` meters placed
// `lateral_offset` meters beside the drive.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "oori/channel.hpp"
#include "oori/errors.hpp"
#include "oori/geometry.hpp"
#include "oori/scene.hpp"

namespace oori {

enum class SceneKind { Corridor, Grid, ManhattanBlock };

inline SceneKind parse_scene_kind(const std::string& s) {
  if (s == "corridor") return SceneKind::Corridor;
  if (s == "grid") return SceneKind::Grid;
  if (s == "manhattan-block") return SceneKind::ManhattanBlock;
  throw ConfigError("unknown scene kind '" + s + "' (corridor, grid, manhattan-block)");
}

struct SceneParams {
  double length{1000.0};
  double gnb_spacing{250.0};
  double lateral_offset{4.0};
  double gnb_height{10.0};
  double street_width{20.0};
  double wall_loss_db{kDefaultWallLossDb};
  // grid and manhattan-block
  double block_length{60.0};
  double block_depth{25.0};
  double cross_street{12.0};
  int rows{2};
  int cols{10};
  // manhattan-block only: per-building yaw and setback jitter
  double yaw_jitter_deg{12.0};
  double setback_max{3.0};
  std::uint64_t seed{1};

  void validate(SceneKind kind) const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(name) + " must be > 0");
    };
    positive(gnb_spacing, "gnb_spacing");
    positive(street_width, "street_width");
    if (!(lateral_offset >= 0.0) || lateral_offset >= street_width / 2.0) {
      throw ConfigError("lateral_offset must lie in [0, street_width / 2)");
    }
    if (!(wall_loss_db >= 0.0)) throw ConfigError("wall_loss_db must be >= 0");
    if (kind == SceneKind::Grid) {
      if (rows < 1 || cols < 1) throw ConfigError("grid needs at least 1x1 blocks");
      positive(block_length, "block_length");
    } else {
      positive(length, "length");
    }
    if (kind == SceneKind::ManhattanBlock) {
      positive(block_length, "block_length");
      positive(block_depth, "block_depth");
      positive(cross_street, "cross_street");
      if (!(yaw_jitter_deg >= 0.0 && yaw_jitter_deg < 45.0)) {
        throw ConfigError("yaw_jitter_deg must lie in [0, 45)");
      }
      if (!(setback_max >= 0.0)) throw ConfigError("setback_max must be >= 0");
    }
  }
};

/// Drive length implied by the scene parameters.
inline double drive_length(SceneKind kind, const SceneParams& p) {
  if (kind == SceneKind::Grid) return p.cols * (p.block_length + p.cross_street);
  return p.length;
}

inline std::vector<GnbSite> gnb_row(double length, const SceneParams& p) {
  const auto n = static_cast<int>(std::ceil(length / p.gnb_spacing - 1e-9)) + 1;
  std::vector<GnbSite> gnbs;
  for (int i = 0; i < n; ++i) {
    gnbs.push_back({i + 1, {i * p.gnb_spacing, p.lateral_offset}, p.gnb_height});
  }
  return gnbs;
}

namespace detail {

inline void add_polygon(std::vector<Wall>& walls, const std::vector<Point2>& pts, double loss) {
  for (std::size_t i = 0; i < pts.size(); ++i) {
    walls.push_back({Segment(pts[i], pts[(i + 1) % pts.size()]), loss});
  }
}

inline void add_rect(std::vector<Wall>& walls, double x0, double y0, double x1, double y1,
                     double loss) {
  add_polygon(walls, {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}, loss);
}

}  // namespace detail

inline Scene generate_scene(SceneKind kind, const SceneParams& p) {
  p.validate(kind);
  const double half = p.street_width / 2.0;
  std::vector<Wall> walls;
  switch (kind) {
    case SceneKind::Corridor: {
      const double margin = p.street_width * 5.0;
      walls.push_back({Segment({-margin, half}, {p.length + margin, half}), p.wall_loss_db});
      walls.push_back({Segment({-margin, -half}, {p.length + margin, -half}), p.wall_loss_db});
      break;
    }
    case SceneKind::Grid: {
      // rows of square blocks; the drive runs along the street between the
      // lower rows/2 and the upper rows - rows/2
      const double pitch = p.block_length + p.cross_street;
      const int below = p.rows / 2;
      const int above = p.rows - below;
      for (int c = 0; c < p.cols; ++c) {
        const double x0 = c * pitch + p.cross_street / 2.0;
        for (int r = 0; r < above; ++r) {
          const double y0 = half + r * pitch;
          detail::add_rect(walls, x0, y0, x0 + p.block_length, y0 + p.block_length, p.wall_loss_db);
        }
        for (int r = 0; r < below; ++r) {
          const double y1 = -half - r * pitch;
          detail::add_rect(walls, x0, y1 - p.block_length, x0 + p.block_length, y1, p.wall_loss_db);
        }
      }
      break;
    }
    case SceneKind::ManhattanBlock: {
      // buildings along both sides with per-building yaw and setback
      std::mt19937_64 rng(p.seed);
      std::uniform_real_distribution<double> yaw(-p.yaw_jitter_deg, p.yaw_jitter_deg);
      std::uniform_real_distribution<double> setback(0.0, p.setback_max);
      for (int side : {1, -1}) {
        for (double x = -p.block_length; x < p.length + p.block_length;
             x += p.block_length + p.cross_street) {
          const double theta = deg_to_rad(yaw(rng));
          const double back = setback(rng);
          const double w = p.block_length / 2.0;
          const double face_y = side * (half + back + w * std::abs(std::sin(theta)));
          const Point2 center{x + w, face_y};
          const Point2 along{std::cos(theta), std::sin(theta)};
          const Point2 inward = Point2{-along.y, along.x} * static_cast<double>(side);
          const Point2 a = center - along * w;
          const Point2 b = center + along * w;
          detail::add_polygon(
              walls, {a, b, b + inward * p.block_depth, a + inward * p.block_depth},
              p.wall_loss_db);
        }
      }
      break;
    }
  }
  return Scene(std::move(walls), gnb_row(drive_length(kind, p), p));
}

/// UE drive along y = 0 at constant speed, sampled every `step` meters.
inline std::vector<TrajectoryPoint> straight_trajectory(double length, double step, double speed,
                                                        double ue_height) {
  if (!(length > 0.0) || !(step > 0.0) || !(speed > 0.0)) {
    throw ConfigError("trajectory length, step and speed must be > 0");
  }
  std::vector<TrajectoryPoint> out;
  const auto n = static_cast<std::size_t>(std::floor(length / step + 1e-9)) + 1;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(i) * step;
    out.push_back({x / speed, {x, 0.0}, ue_height});
  }
  return out;
}

}  // namespace oori
