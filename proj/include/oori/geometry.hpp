#pragma once
// 2D geometry primitives shared by the ray tracer and the positioning code.
//
// Conventions:
//   - coordinates in meters, x east, y north;
//   - bearings in degrees, clockwise from +y, so the unit vector of a
//     bearing b is (sin b, cos b);
//   - lines are kept in normalized general form n_x*x + n_y*y = c.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <ostream>

#include "oori/errors.hpp"

namespace oori {

inline constexpr double kParallelEps = 1e-9;

struct Point2 {
  double x{0.0};
  double y{0.0};

  constexpr Point2 operator+(const Point2& o) const { return {x + o.x, y + o.y}; }
  constexpr Point2 operator-(const Point2& o) const { return {x - o.x, y - o.y}; }
  constexpr Point2 operator*(double s) const { return {x * s, y * s}; }
  friend constexpr Point2 operator*(double s, const Point2& p) { return {p.x * s, p.y * s}; }
  constexpr bool operator==(const Point2&) const = default;

  [[nodiscard]] bool finite() const { return std::isfinite(x) && std::isfinite(y); }

  friend std::ostream& operator<<(std::ostream& os, const Point2& p) {
    return os << '(' << p.x << ", " << p.y << ')';
  }
};

constexpr double dot(const Point2& a, const Point2& b) { return a.x * b.x + a.y * b.y; }
/// z-component of the 3D cross product.
constexpr double cross(const Point2& a, const Point2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Point2& v) { return std::hypot(v.x, v.y); }
inline double distance(const Point2& a, const Point2& b) { return norm(b - a); }

inline constexpr double deg_to_rad(double deg) { return deg * (std::numbers::pi / 180.0); }
inline constexpr double rad_to_deg(double rad) { return rad * (180.0 / std::numbers::pi); }

/// Wall primitive. Construction rejects zero-length segments.
class Segment {
 public:
  Segment(Point2 a, Point2 b) : a_(a), b_(b) {
    if (!a.finite() || !b.finite()) throw DegenerateGeometry("segment has non-finite endpoint");
    if (a == b) throw DegenerateGeometry("segment has zero length");
  }

  [[nodiscard]] const Point2& a() const { return a_; }
  [[nodiscard]] const Point2& b() const { return b_; }
  [[nodiscard]] Point2 direction() const { return b_ - a_; }
  [[nodiscard]] double length() const { return norm(b_ - a_); }
  [[nodiscard]] Point2 at(double t) const { return a_ + (b_ - a_) * t; }

  bool operator==(const Segment&) const = default;

 private:
  Point2 a_;
  Point2 b_;
};

/// Angle clockwise from north, normalized to [0, 360).
class Bearing {
 public:
  constexpr Bearing() = default;
  explicit Bearing(double degrees) : deg_(normalize(degrees)) {}

  static Bearing from_radians(double rad) { return Bearing(rad_to_deg(rad)); }

  [[nodiscard]] double degrees() const { return deg_; }
  [[nodiscard]] double radians() const { return deg_to_rad(deg_); }
  /// (sin b, cos b)
  [[nodiscard]] Point2 unit() const {
    const double r = radians();
    return {std::sin(r), std::cos(r)};
  }
  [[nodiscard]] Bearing reversed() const { return Bearing(deg_ + 180.0); }

  bool operator==(const Bearing&) const = default;

  static double normalize(double degrees) {
    double v = std::fmod(degrees, 360.0);
    if (v < 0.0) v += 360.0;
    if (v >= 360.0) v = 0.0;  // -tiny + 360 rounds to 360
    return v;
  }

 private:
  double deg_{0.0};
};

/// Signed smallest difference a - b in degrees, in (-180, 180].
inline double angle_diff_deg(double a, double b) {
  double d = std::fmod(a - b, 360.0);
  if (d <= -180.0) d += 360.0;
  if (d > 180.0) d -= 360.0;
  return d;
}

/// The locus n_x*x + n_y*y = c with unit normal whose first nonzero
/// component is positive.
class Line {
 public:
  static Line from_coefficients(double nx, double ny, double c) {
    const double h = std::hypot(nx, ny);
    if (!(h > 0.0) || !std::isfinite(h) || !std::isfinite(c)) {
      throw DegenerateGeometry("line normal is zero or non-finite");
    }
    nx /= h;
    ny /= h;
    c /= h;
    if (nx < 0.0 || (nx == 0.0 && ny < 0.0)) {
      nx = -nx;
      ny = -ny;
      c = -c;
    }
    return Line(nx, ny, c);
  }

  static Line through(const Point2& p, const Point2& q) {
    if (p == q) throw DegenerateGeometry("line through coincident points");
    const Point2 d = q - p;
    // normal is d rotated by +90 degrees
    return from_coefficients(-d.y, d.x, -d.y * p.x + d.x * p.y);
  }

  /// y = slope*x + intercept
  static Line from_slope_intercept(double slope, double intercept) {
    return from_coefficients(-slope, 1.0, intercept);
  }

  [[nodiscard]] double nx() const { return nx_; }
  [[nodiscard]] double ny() const { return ny_; }
  [[nodiscard]] double c() const { return c_; }

  /// Signed distance of p from the line.
  [[nodiscard]] double residual(const Point2& p) const { return nx_ * p.x + ny_ * p.y - c_; }
  [[nodiscard]] double distance(const Point2& p) const { return std::abs(residual(p)); }
  [[nodiscard]] Point2 direction() const { return {-ny_, nx_}; }
  [[nodiscard]] bool is_vertical() const { return ny_ == 0.0; }

  /// Same line within `tol`. Either sign of the normal matches, since the
  /// canonical sign flips when nx is within rounding of zero.
  [[nodiscard]] bool approx_equal(const Line& o, double tol) const {
    const double ctol = tol * std::max(1.0, std::abs(c_));
    auto close = [&](double s) {
      return std::abs(nx_ - s * o.nx_) <= tol && std::abs(ny_ - s * o.ny_) <= tol &&
             std::abs(c_ - s * o.c_) <= ctol;
    };
    return close(1.0) || close(-1.0);
  }

  friend std::ostream& operator<<(std::ostream& os, const Line& l) {
    return os << l.nx_ << "*x + " << l.ny_ << "*y = " << l.c_;
  }

 private:
  Line(double nx, double ny, double c) : nx_(nx), ny_(ny), c_(c) {}

  double nx_;
  double ny_;
  double c_;
};

inline Bearing bearing_from_to(const Point2& from, const Point2& to) {
  if (from == to) throw DegenerateGeometry("bearing between coincident points");
  const Point2 d = to - from;
  return Bearing::from_radians(std::atan2(d.x, d.y));
}

/// Reflection of p across the infinite line carrying s.
inline Point2 mirror_point(const Point2& p, const Segment& s) {
  const Point2 d = s.direction();
  const double t = dot(p - s.a(), d) / dot(d, d);
  const Point2 foot = s.a() + d * t;
  return foot * 2.0 - p;
}

/// Unique common point of two closed segments, if any. Collinear segments
/// sharing more than one point raise AmbiguousIntersection.
inline std::optional<Point2> segment_intersection(const Segment& s1, const Segment& s2) {
  constexpr double eps = 1e-12;
  const Point2 p = s1.a();
  const Point2 r = s1.direction();
  const Point2 q = s2.a();
  const Point2 s = s2.direction();
  const double rr = dot(r, r);
  const double denom = cross(r, s);
  const Point2 qp = q - p;

  if (std::abs(denom) <= eps * std::sqrt(rr * dot(s, s))) {
    if (std::abs(cross(qp, r)) > eps * rr + eps * norm(qp) * std::sqrt(rr)) return std::nullopt;
    double t0 = dot(qp, r) / rr;
    double t1 = t0 + dot(s, r) / rr;
    if (t0 > t1) std::swap(t0, t1);
    const double lo = std::max(0.0, t0);
    const double hi = std::min(1.0, t1);
    if (lo > hi + eps) return std::nullopt;
    if (hi - lo <= eps) return s1.at(0.5 * (lo + hi));
    throw AmbiguousIntersection("collinear overlapping segments");
  }

  const double t = cross(qp, s) / denom;
  const double u = cross(qp, r) / denom;
  if (t < -eps || t > 1.0 + eps || u < -eps || u > 1.0 + eps) return std::nullopt;
  return s1.at(t);
}

inline Point2 intersect_lines(const Line& l1, const Line& l2) {
  const double det = l1.nx() * l2.ny() - l1.ny() * l2.nx();
  if (std::abs(det) < kParallelEps) throw ParallelLines("lines are parallel");
  return {(l1.c() * l2.ny() - l2.c() * l1.ny()) / det,
          (l1.nx() * l2.c() - l2.nx() * l1.c()) / det};
}

}  // namespace oori
