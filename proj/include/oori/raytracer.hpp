#pragma once
// Image-method enumeration of LoS and specular multipath between a gNB and
// a UE over a polygonal scene. Candidate wall sequences are pruned with
// reflection beams (apex at the current image, window = the lit part of the
// last wall) before the exact unfolding and occlusion checks run.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "oori/errors.hpp"
#include "oori/geometry.hpp"
#include "oori/scene.hpp"

namespace oori {

inline constexpr int kDefaultMaxOrder = 3;
inline constexpr int kMaxOrderLimit = 8;
/// Reflection points closer than this to a wall endpoint are rejected.
inline constexpr double kEndpointTolerance = 1e-9;

struct PropagationPath {
  int order{0};
  /// gNB, reflection points..., UE
  std::vector<Point2> vertices;
  std::vector<int> wall_ids;
  double length{0.0};
  Bearing aod;  ///< at the gNB, toward the first vertex after it
  Bearing aoa;  ///< at the UE, toward the last vertex before it
};

namespace detail {

inline double polyline_length(const std::vector<Point2>& v) {
  double len = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i) len += distance(v[i - 1], v[i]);
  return len;
}

/// True when the open segment p->q crosses or touches wall w away from its
/// own endpoints.
inline bool leg_blocked_by(const Point2& p, const Point2& q, const Segment& w) {
  constexpr double eps = 1e-12;
  const Point2 r = q - p;
  const Point2 s = w.direction();
  const Point2 ap = w.a() - p;
  const double denom = cross(r, s);
  const double rr = dot(r, r);
  const double scale = std::sqrt(rr * dot(s, s));
  if (std::abs(denom) <= eps * scale) {
    // parallel: blocked only by collinear overlap of positive length
    if (std::abs(cross(ap, r)) > 1e-9 * std::sqrt(rr)) return false;
    double t0 = dot(ap, r) / rr;
    double t1 = dot(w.b() - p, r) / rr;
    if (t0 > t1) std::swap(t0, t1);
    return std::min(1.0, t1) - std::max(0.0, t0) > eps;
  }
  const double t = cross(ap, s) / denom;
  const double u = cross(ap, r) / denom;
  const double t_tol = 1e-9 / std::sqrt(rr);
  return t > t_tol && t < 1.0 - t_tol && u >= -eps && u <= 1.0 + eps;
}

inline bool leg_clear(const Scene& scene, const Point2& p, const Point2& q, int skip_a,
                      int skip_b) {
  const auto& walls = scene.walls();
  for (int i = 0; i < static_cast<int>(walls.size()); ++i) {
    if (i == skip_a || i == skip_b) continue;
    if (leg_blocked_by(p, q, walls[i].segment)) return false;
  }
  return true;
}

/// Sub-segment of a wall that lies inside a reflection beam.
struct Window {
  Point2 lo;
  Point2 hi;
};

struct Beam {
  Point2 apex;
  Window window;
  int wall{-1};
};

/// Clip p->q (parameters [t0, t1]) to the half-plane f(X) >= 0, f affine.
template <class F>
bool clip_halfplane(const F& f, const Point2& p, const Point2& q, double& t0, double& t1) {
  const double fp = f(p);
  const double fq = f(q);
  constexpr double slack = 1e-9;
  if (fp < -slack && fq < -slack) return false;
  if (fp >= -slack && fq >= -slack) return true;
  const double t = (fp + slack) / (fp - fq);
  if (fp < -slack) {
    t0 = std::max(t0, t);
  } else {
    t1 = std::min(t1, t);
  }
  return t0 <= t1;
}

/// Portion of `seg` lit by `beam` (conservative: never drops a lit point).
inline bool clip_to_beam(const Beam& beam, const Segment& wall_of_beam, const Segment& seg,
                         Window& out) {
  const Point2 a = beam.apex;
  Point2 l = beam.window.lo - a;
  Point2 r = beam.window.hi - a;
  if (cross(l, r) < 0.0) std::swap(l, r);
  const Point2 n{-wall_of_beam.direction().y, wall_of_beam.direction().x};
  const double apex_side = dot(a - wall_of_beam.a(), n);
  const double scale = std::max(1.0, norm(l) + norm(r));
  auto left_edge = [&](const Point2& x) { return cross(l, x - a) / scale; };
  auto right_edge = [&](const Point2& x) { return cross(x - a, r) / scale; };
  auto far_side = [&](const Point2& x) {
    const double s = dot(x - wall_of_beam.a(), n) / norm(n);
    return apex_side > 0.0 ? -s : s;
  };
  double t0 = 0.0;
  double t1 = 1.0;
  const Point2 p = seg.a();
  const Point2 q = seg.b();
  if (!clip_halfplane(left_edge, p, q, t0, t1)) return false;
  if (!clip_halfplane(right_edge, p, q, t0, t1)) return false;
  if (!clip_halfplane(far_side, p, q, t0, t1)) return false;
  out = {seg.at(t0), seg.at(t1)};
  return true;
}

inline bool same_path(const PropagationPath& a, const PropagationPath& b) {
  if (a.vertices.size() != b.vertices.size()) return false;
  for (std::size_t i = 0; i < a.vertices.size(); ++i) {
    if (distance(a.vertices[i], b.vertices[i]) > 1e-9) return false;
  }
  return true;
}

class Tracer {
 public:
  Tracer(const Scene& scene, Point2 gnb, Point2 ue, int max_order)
      : scene_(scene), gnb_(gnb), ue_(ue), max_order_(max_order) {
    // A wall of a closed outline can only reflect on the side the gNB is on:
    // any path crossing into or out of the outline is occluded.
    const auto& walls = scene_.walls();
    lit_.assign(walls.size(), 0);
    for (int poly = 0; poly < static_cast<int>(scene_.polygons().size()); ++poly) {
      const auto& ids = scene_.polygons()[poly];
      double area = 0.0;
      for (int w : ids) area += cross(walls[w].segment.a(), walls[w].segment.b());
      if (area == 0.0) continue;
      int sign = area > 0.0 ? -1 : 1;  // outside of a ccw outline is on the right
      if (scene_.inside_polygon(poly, gnb_)) sign = -sign;
      for (int w : ids) lit_[w] = sign;
    }
  }

  std::vector<PropagationPath> run() {
    if (leg_clear(scene_, gnb_, ue_, -1, -1)) emit({gnb_, ue_}, {});
    std::vector<int> seq;
    std::vector<Point2> images{gnb_};
    for (int w = 0; w < static_cast<int>(scene_.walls().size()) && max_order_ > 0; ++w) {
      const Segment& seg = scene_.walls()[w].segment;
      if (!lit_from(w, gnb_)) continue;
      descend(w, Beam{mirror_point(gnb_, seg), {seg.a(), seg.b()}, w}, seq, images);
    }
    return std::move(paths_);
  }

 private:
  void descend(int wall, const Beam& beam, std::vector<int>& seq, std::vector<Point2>& images) {
    seq.push_back(wall);
    images.push_back(beam.apex);
    try_complete(seq, images);
    if (static_cast<int>(seq.size()) < max_order_) {
      const auto& walls = scene_.walls();
      for (int w = 0; w < static_cast<int>(walls.size()); ++w) {
        if (w == wall || !lit_from(w, beam.apex)) continue;
        Window win{};
        if (!clip_to_beam(beam, walls[wall].segment, walls[w].segment, win)) continue;
        const Segment& seg = walls[w].segment;
        descend(w, Beam{mirror_point(beam.apex, seg), win, w}, seq, images);
      }
    }
    seq.pop_back();
    images.pop_back();
  }

  /// Strictly on the reflecting side of wall w (either side if two-sided).
  [[nodiscard]] bool lit_from(int w, const Point2& x) const {
    const Segment& seg = scene_.walls()[w].segment;
    const double c = cross(seg.direction(), x - seg.a());
    if (std::abs(c) <= 1e-12 * seg.length()) return false;
    return lit_[w] == 0 || (c > 0.0) == (lit_[w] > 0);
  }

  /// Unfold the path for wall sequence `seq` backward from the UE.
  void try_complete(const std::vector<int>& seq, const std::vector<Point2>& images) {
    const auto& walls = scene_.walls();
    const std::size_t k = seq.size();
    if (lit_[seq.back()] != 0 && !lit_from(seq.back(), ue_)) return;
    std::vector<Point2> verts(k + 2);
    verts[0] = gnb_;
    verts[k + 1] = ue_;
    Point2 from = ue_;
    for (std::size_t j = k; j >= 1; --j) {
      const Segment& seg = walls[seq[j - 1]].segment;
      const Point2 to = images[j];
      const Point2 r = to - from;
      const Point2 s = seg.direction();
      const double denom = cross(r, s);
      if (denom == 0.0) return;
      const Point2 ap = seg.a() - from;
      const double t = cross(ap, s) / denom;
      const double u = cross(ap, r) / denom;
      if (!(t > 0.0 && t < 1.0)) return;
      const double u_tol = kEndpointTolerance / seg.length();
      if (!(u > u_tol && u < 1.0 - u_tol)) return;
      verts[j] = seg.at(u);
      if (distance(verts[j], from) <= kEndpointTolerance) return;
      from = verts[j];
    }
    if (distance(verts[0], verts[1]) <= kEndpointTolerance) return;
    for (std::size_t i = 0; i + 1 < verts.size(); ++i) {
      const int skip_a = i == 0 ? -1 : seq[i - 1];
      const int skip_b = i + 1 == verts.size() - 1 ? -1 : seq[i];
      if (!leg_clear(scene_, verts[i], verts[i + 1], skip_a, skip_b)) return;
    }
    emit(std::move(verts), seq);
  }

  void emit(std::vector<Point2> verts, std::vector<int> walls) {
    PropagationPath p;
    p.order = static_cast<int>(verts.size()) - 2;
    p.length = polyline_length(verts);
    p.aod = bearing_from_to(verts.front(), verts[1]);
    p.aoa = bearing_from_to(verts.back(), verts[verts.size() - 2]);
    p.vertices = std::move(verts);
    p.wall_ids = std::move(walls);
    for (const auto& q : paths_) {
      if (same_path(q, p)) return;
    }
    paths_.push_back(std::move(p));
  }

  const Scene& scene_;
  Point2 gnb_;
  Point2 ue_;
  int max_order_;
  std::vector<int> lit_;
  std::vector<PropagationPath> paths_;
};

}  // namespace detail

/// Every LoS and specular path from `gnb` to `ue` with at most `max_order`
/// reflections, ordered by reflection order.
inline std::vector<PropagationPath> trace_paths(const Scene& scene, const Point2& gnb,
                                                const Point2& ue,
                                                int max_order = kDefaultMaxOrder) {
  if (max_order < 0 || max_order > kMaxOrderLimit) {
    throw ConfigError("max_order must lie in [0, " + std::to_string(kMaxOrderLimit) + "]");
  }
  if (gnb == ue) throw DegenerateGeometry("gNB and UE coincide");
  auto paths = detail::Tracer(scene, gnb, ue, max_order).run();
  std::stable_sort(paths.begin(), paths.end(),
                   [](const auto& a, const auto& b) { return a.order < b.order; });
  return paths;
}

/// Specular law and visibility check, independent of the tracer's unfolding.
inline bool validate_path(const Scene& scene, const PropagationPath& path) {
  const auto& v = path.vertices;
  if (v.size() < 2) return false;
  if (path.order != static_cast<int>(v.size()) - 2) return false;
  if (path.wall_ids.size() != static_cast<std::size_t>(path.order)) return false;
  for (const auto& p : v) {
    if (!p.finite()) return false;
  }
  if (std::abs(path.length - detail::polyline_length(v)) > 1e-9 * std::max(1.0, path.length)) {
    return false;
  }
  const auto& walls = scene.walls();
  for (int i = 0; i < path.order; ++i) {
    const int id = path.wall_ids[i];
    if (id < 0 || id >= static_cast<int>(walls.size())) return false;
    const Segment& seg = walls[id].segment;
    const Point2 refl = v[i + 1];
    const double len = seg.length();
    const Point2 t = seg.direction() * (1.0 / len);
    const Point2 n{-t.y, t.x};
    const double off = dot(refl - seg.a(), n);
    const double along = dot(refl - seg.a(), t);
    if (std::abs(off) > 1e-9) return false;
    if (!(along > kEndpointTolerance && along < len - kEndpointTolerance)) return false;
    const Point2 in = v[i] - refl;
    const Point2 out = v[i + 2] - refl;
    const double in_n = dot(in, n);
    const double out_n = dot(out, n);
    if (in_n == 0.0 || out_n == 0.0 || (in_n > 0.0) != (out_n > 0.0)) return false;
    // angles from the normal on the lit side; specular means they cancel
    const double sign = in_n > 0.0 ? 1.0 : -1.0;
    const double a_in = std::atan2(dot(in, t), sign * in_n);
    const double a_out = std::atan2(dot(out, t), sign * out_n);
    if (std::abs(a_in + a_out) > 1e-9) return false;
  }
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    if (v[i] == v[i + 1]) return false;
    const int skip_a = i == 0 ? -1 : path.wall_ids[i - 1];
    const int skip_b = i + 1 == v.size() - 1 ? -1 : path.wall_ids[i];
    if (!detail::leg_clear(scene, v[i], v[i + 1], skip_a, skip_b)) return false;
  }
  return true;
}

}  // namespace oori
