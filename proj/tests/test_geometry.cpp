#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oori/geometry.hpp"
#include "support.hpp"

using namespace oori;

TEST(Bearing, CardinalDirections) {
  EXPECT_DOUBLE_EQ(bearing_from_to({0, 0}, {0, 5}).degrees(), 0.0);
  EXPECT_DOUBLE_EQ(bearing_from_to({0, 0}, {5, 0}).degrees(), 90.0);
  EXPECT_NEAR(bearing_from_to({0, 0}, {10, 10}).degrees(), 45.0, 1e-12);
  EXPECT_NEAR(bearing_from_to({0, 0}, {-1, 0}).degrees(), 270.0, 1e-12);
}

TEST(Bearing, CoincidentPointsThrow) {
  EXPECT_THROW(bearing_from_to({1, 2}, {1, 2}), DegenerateGeometry);
}

TEST(Bearing, NormalizesIntoRange) {
  EXPECT_DOUBLE_EQ(Bearing(-90.0).degrees(), 270.0);
  EXPECT_DOUBLE_EQ(Bearing(360.0).degrees(), 0.0);
  EXPECT_DOUBLE_EQ(Bearing(725.0).degrees(), 5.0);
  EXPECT_DOUBLE_EQ(Bearing(-1e-20).degrees(), 0.0);
  for (double d : {-1e-13, -720.0, 359.9999999999999, 1e6}) {
    const double v = Bearing(d).degrees();
    EXPECT_GE(v, 0.0);
    EXPECT_LT(v, 360.0);
  }
}

TEST(Bearing, RoundTripProperty) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 2000; ++i) {
    const Point2 a = fixtures::random_point(rng, -500, 500);
    const Point2 b = fixtures::random_point(rng, -500, 500);
    const Point2 back = a + bearing_from_to(a, b).unit() * distance(a, b);
    EXPECT_NEAR(back.x, b.x, 1e-12 * 1000);
    EXPECT_NEAR(back.y, b.y, 1e-12 * 1000);
  }
}

TEST(Mirror, Examples) {
  const Point2 p = mirror_point({1, 1}, Segment({0, 0}, {10, 0}));
  EXPECT_DOUBLE_EQ(p.x, 1.0);
  EXPECT_DOUBLE_EQ(p.y, -1.0);
  const Point2 on = mirror_point({4, 0}, Segment({0, 0}, {10, 0}));
  EXPECT_DOUBLE_EQ(on.x, 4.0);
  EXPECT_DOUBLE_EQ(on.y, 0.0);
  const Point2 q = mirror_point({3, 4}, Segment({0, -1}, {0, 1}));
  EXPECT_DOUBLE_EQ(q.x, -3.0);
  EXPECT_DOUBLE_EQ(q.y, 4.0);
}

TEST(Mirror, IsAnInvolution) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 5000; ++i) {
    const Point2 p = fixtures::random_point(rng, -100, 100);
    const Segment s(fixtures::random_point(rng, -100, 100), fixtures::random_point(rng, -100, 100));
    const Point2 back = mirror_point(mirror_point(p, s), s);
    EXPECT_NEAR(back.x, p.x, 1e-12 * 300);
    EXPECT_NEAR(back.y, p.y, 1e-12 * 300);
  }
}

TEST(Segment, RejectsZeroLength) {
  EXPECT_THROW(Segment({1, 1}, {1, 1}), DegenerateGeometry);
  EXPECT_THROW(Segment({NAN, 1}, {1, 1}), DegenerateGeometry);
}

TEST(SegmentIntersection, Examples) {
  auto p = segment_intersection(Segment({0, -1}, {0, 1}), Segment({-1, 0}, {1, 0}));
  ASSERT_TRUE(p);
  EXPECT_NEAR(p->x, 0.0, 1e-15);
  EXPECT_NEAR(p->y, 0.0, 1e-15);
  EXPECT_FALSE(segment_intersection(Segment({0, 0}, {5, 0}), Segment({0, 1}, {5, 1})));
  auto q = segment_intersection(Segment({0, 0}, {2, 2}), Segment({0, 2}, {2, 0}));
  ASSERT_TRUE(q);
  EXPECT_DOUBLE_EQ(q->x, 1.0);
  EXPECT_DOUBLE_EQ(q->y, 1.0);
}

TEST(SegmentIntersection, DisjointAndTouching) {
  EXPECT_FALSE(segment_intersection(Segment({0, 0}, {1, 0}), Segment({2, -1}, {2, 1})));
  auto t = segment_intersection(Segment({0, 0}, {1, 0}), Segment({1, 0}, {1, 5}));
  ASSERT_TRUE(t);
  EXPECT_DOUBLE_EQ(t->x, 1.0);
  EXPECT_DOUBLE_EQ(t->y, 0.0);
}

TEST(SegmentIntersection, CollinearOverlapIsAmbiguous) {
  EXPECT_THROW(segment_intersection(Segment({0, 0}, {4, 0}), Segment({2, 0}, {6, 0})),
               AmbiguousIntersection);
  EXPECT_FALSE(segment_intersection(Segment({0, 0}, {1, 0}), Segment({2, 0}, {3, 0})));
}

TEST(Line, NormalizedForm) {
  const Line l = Line::from_coefficients(-3, -4, -10);
  EXPECT_DOUBLE_EQ(l.nx(), 0.6);
  EXPECT_DOUBLE_EQ(l.ny(), 0.8);
  EXPECT_DOUBLE_EQ(l.c(), 2.0);
  const Line h = Line::from_coefficients(0, -2, 4);
  EXPECT_DOUBLE_EQ(h.nx(), 0.0);
  EXPECT_DOUBLE_EQ(h.ny(), 1.0);
  EXPECT_DOUBLE_EQ(h.c(), -2.0);
  EXPECT_THROW(Line::from_coefficients(0, 0, 1), DegenerateGeometry);
}

TEST(Line, NormalizationIsScaleInvariantAndIdempotent) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-10, 10);
  std::uniform_real_distribution<double> k(0.01, 100);
  for (int i = 0; i < 2000; ++i) {
    const double a = u(rng), b = u(rng), c = u(rng);
    const double s = (i % 2 ? 1.0 : -1.0) * k(rng);
    const Line l1 = Line::from_coefficients(a, b, c);
    const Line l2 = Line::from_coefficients(s * a, s * b, s * c);
    EXPECT_TRUE(l1.approx_equal(l2, 1e-12));
    const Line l3 = Line::from_coefficients(l1.nx(), l1.ny(), l1.c());
    EXPECT_NEAR(l3.nx(), l1.nx(), 1e-15);
    EXPECT_NEAR(l3.ny(), l1.ny(), 1e-15);
    EXPECT_DOUBLE_EQ(l3.c(), l1.c());
    EXPECT_NEAR(std::hypot(l1.nx(), l1.ny()), 1.0, 1e-15);
  }
}

TEST(IntersectLines, Examples) {
  const Point2 p = intersect_lines(Line::from_coefficients(1, 0, 10), Line::from_coefficients(0, 1, 0));
  EXPECT_DOUBLE_EQ(p.x, 10.0);
  EXPECT_DOUBLE_EQ(p.y, 0.0);
  EXPECT_THROW(intersect_lines(Line::from_coefficients(1, 0, 10), Line::from_coefficients(1, 0, 12)),
               ParallelLines);
}

TEST(IntersectLines, SatisfiesBothEquations) {
  std::mt19937_64 rng(14);
  int checked = 0;
  for (int i = 0; i < 3000; ++i) {
    const Line a = Line::through(fixtures::random_point(rng, -100, 100), fixtures::random_point(rng, -100, 100));
    const Line b = Line::through(fixtures::random_point(rng, -100, 100), fixtures::random_point(rng, -100, 100));
    if (std::abs(a.nx() * b.ny() - a.ny() * b.nx()) < 1e-3) continue;
    const Point2 p = intersect_lines(a, b);
    EXPECT_LT(a.distance(p), 1e-9);
    EXPECT_LT(b.distance(p), 1e-9);
    ++checked;
  }
  EXPECT_GT(checked, 2500);
}

TEST(Line, SlopeInterceptAgreesWithTwoPoints) {
  const Line a = Line::from_slope_intercept(2.0, 1.0);
  const Line b = Line::through({0, 1}, {1, 3});
  EXPECT_TRUE(a.approx_equal(b, 1e-15));
}

TEST(Line, ApproxEqualIgnoresNormalSign) {
  const Line a = Line::from_coefficients(0, 1, 0);
  const Line b = Line::from_coefficients(1e-17, -1, 0);
  EXPECT_TRUE(a.approx_equal(b, 1e-12));
  EXPECT_FALSE(a.approx_equal(Line::from_coefficients(0, 1, 1), 1e-12));
}
