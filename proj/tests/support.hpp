#pragma once
// Shared fixtures for the test suites: random scenes and hand-built paths.

#include <cmath>
#include <random>
#include <vector>

#include "oori/geometry.hpp"
#include "oori/raytracer.hpp"
#include "oori/scene.hpp"

namespace oori::fixtures {

inline Point2 random_point(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  return {u(rng), u(rng)};
}

/// `n` free-standing walls of random pose inside [-span, span]^2.
inline std::vector<Wall> random_walls(std::mt19937_64& rng, int n, double span) {
  std::uniform_real_distribution<double> len(5.0, 40.0);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * std::numbers::pi);
  std::vector<Wall> walls;
  for (int i = 0; i < n; ++i) {
    const Point2 c = random_point(rng, -span, span);
    const double a = ang(rng);
    const Point2 h = Point2{std::cos(a), std::sin(a)} * (len(rng) / 2.0);
    walls.push_back({Segment(c - h, c + h), 6.0});
  }
  return walls;
}

/// Random gNB/wall/UE configuration that has at least one single-bounce
/// path; also returns that path.
struct BounceCase {
  Scene scene;
  Point2 gnb;
  Point2 ue;
  PropagationPath path;
};

inline BounceCase random_bounce_case(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> nwalls(1, 4);
  while (true) {
    Scene scene(random_walls(rng, nwalls(rng), 60.0), {});
    const Point2 gnb = random_point(rng, -80.0, 80.0);
    const Point2 ue = random_point(rng, -80.0, 80.0);
    if (distance(gnb, ue) < 1.0) continue;
    for (const auto& p : trace_paths(scene, gnb, ue, 1)) {
      if (p.order == 1) return {scene, gnb, ue, p};
    }
  }
}

/// Axis-aligned rectangle outline, counter-clockwise.
inline std::vector<Wall> rect_walls(double x0, double y0, double x1, double y1,
                                    double loss = 6.0) {
  const std::vector<Point2> p{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
  std::vector<Wall> w;
  for (std::size_t i = 0; i < 4; ++i) w.push_back({Segment(p[i], p[(i + 1) % 4]), loss});
  return w;
}

}  // namespace oori::fixtures
