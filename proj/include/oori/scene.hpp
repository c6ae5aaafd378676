#pragma once

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "oori/errors.hpp"
#include "oori/geometry.hpp"

namespace oori {

inline constexpr double kDefaultWallLossDb = 6.0;

struct Wall {
  Segment segment;
  double loss_db{kDefaultWallLossDb};
};

struct GnbSite {
  int id{0};
  Point2 position;
  double height{0.0};
};

struct Bounds {
  Point2 min;
  Point2 max;
};

/// Polygonal 2D world: reflecting walls plus base-station sites.
class Scene {
 public:
  Scene() = default;
  Scene(std::vector<Wall> walls, std::vector<GnbSite> gnbs)
      : walls_(std::move(walls)), gnbs_(std::move(gnbs)) {
    validate();
    find_polygons();
  }

  [[nodiscard]] const std::vector<Wall>& walls() const { return walls_; }

  /// Closed building outlines found among consecutive walls, as wall-index
  /// lists. Walls outside any outline have polygon_of() == -1.
  [[nodiscard]] const std::vector<std::vector<int>>& polygons() const { return polygons_; }
  [[nodiscard]] int polygon_of(int wall) const { return polygon_of_[wall]; }

  /// Even-odd point-in-polygon test against polygon `poly`.
  [[nodiscard]] bool inside_polygon(int poly, const Point2& p) const {
    bool in = false;
    for (int w : polygons_[poly]) {
      const Point2& a = walls_[w].segment.a();
      const Point2& b = walls_[w].segment.b();
      if ((a.y > p.y) != (b.y > p.y)) {
        const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
        if (p.x < x) in = !in;
      }
    }
    return in;
  }
  [[nodiscard]] const std::vector<GnbSite>& gnbs() const { return gnbs_; }

  [[nodiscard]] const GnbSite& gnb(int id) const {
    for (const auto& g : gnbs_) {
      if (g.id == id) return g;
    }
    throw DataError("unknown gNB id " + std::to_string(id));
  }

  /// Axis-aligned extent of walls and sites; empty scene yields a zero box.
  [[nodiscard]] Bounds bounds() const {
    if (walls_.empty() && gnbs_.empty()) return {};
    constexpr double inf = std::numeric_limits<double>::infinity();
    Bounds b{{inf, inf}, {-inf, -inf}};
    auto grow = [&b](const Point2& p) {
      b.min = {std::min(b.min.x, p.x), std::min(b.min.y, p.y)};
      b.max = {std::max(b.max.x, p.x), std::max(b.max.y, p.y)};
    };
    for (const auto& w : walls_) {
      grow(w.segment.a());
      grow(w.segment.b());
    }
    for (const auto& g : gnbs_) grow(g.position);
    return b;
  }

 private:
  void validate() const {
    for (const auto& w : walls_) {
      if (!(w.loss_db >= 0.0) || !std::isfinite(w.loss_db)) {
        throw ConfigError("wall reflection loss must be a finite value >= 0 dB");
      }
    }
    std::set<int> ids;
    for (const auto& g : gnbs_) {
      if (!g.position.finite() || !std::isfinite(g.height)) {
        throw ConfigError("gNB " + std::to_string(g.id) + " has non-finite coordinates");
      }
      if (!ids.insert(g.id).second) throw ConfigError("duplicate gNB id " + std::to_string(g.id));
    }
  }

  // A run of walls i..j with wall[k].b == wall[k+1].a that closes on itself.
  void find_polygons() {
    polygon_of_.assign(walls_.size(), -1);
    std::size_t i = 0;
    while (i < walls_.size()) {
      std::size_t j = i;
      while (j + 1 < walls_.size() && walls_[j].segment.b() == walls_[j + 1].segment.a() &&
             walls_[j].segment.b() != walls_[i].segment.a()) {
        ++j;
      }
      if (j >= i + 2 && walls_[j].segment.b() == walls_[i].segment.a()) {
        std::vector<int> poly;
        for (std::size_t k = i; k <= j; ++k) {
          polygon_of_[k] = static_cast<int>(polygons_.size());
          poly.push_back(static_cast<int>(k));
        }
        polygons_.push_back(std::move(poly));
        i = j + 1;
      } else {
        ++i;
      }
    }
  }

  std::vector<Wall> walls_;
  std::vector<GnbSite> gnbs_;
  std::vector<std::vector<int>> polygons_;
  std::vector<int> polygon_of_;
};

inline nlohmann::json scene_to_json(const Scene& scene) {
  nlohmann::json walls = nlohmann::json::array();
  for (const auto& w : scene.walls()) {
    walls.push_back({{"x1", w.segment.a().x},
                     {"y1", w.segment.a().y},
                     {"x2", w.segment.b().x},
                     {"y2", w.segment.b().y},
                     {"loss_db", w.loss_db}});
  }
  nlohmann::json gnbs = nlohmann::json::array();
  for (const auto& g : scene.gnbs()) {
    gnbs.push_back({{"id", g.id}, {"x", g.position.x}, {"y", g.position.y}, {"z", g.height}});
  }
  nlohmann::json j;
  j["walls"] = std::move(walls);
  j["gnbs"] = std::move(gnbs);
  return j;
}

inline Scene scene_from_json(const nlohmann::json& j) {
  try {
    std::vector<Wall> walls;
    if (j.contains("walls")) {
      for (const auto& w : j.at("walls")) {
        walls.push_back({Segment({w.at("x1").get<double>(), w.at("y1").get<double>()},
                                 {w.at("x2").get<double>(), w.at("y2").get<double>()}),
                         w.value("loss_db", kDefaultWallLossDb)});
      }
    }
    std::vector<GnbSite> gnbs;
    if (j.contains("gnbs")) {
      for (const auto& g : j.at("gnbs")) {
        gnbs.push_back({g.at("id").get<int>(),
                        {g.at("x").get<double>(), g.at("y").get<double>()},
                        g.value("z", 0.0)});
      }
    }
    return Scene(std::move(walls), std::move(gnbs));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed scene: ") + e.what());
  } catch (const DegenerateGeometry& e) {
    throw DataError(std::string("malformed scene: ") + e.what());
  }
}

inline void write_scene(const Scene& scene, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out << scene_to_json(scene).dump(2) << '\n';
}

inline Scene read_scene(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open scene file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(path + ": " + e.what());
  }
  return scene_from_json(j);
}

}  // namespace oori
