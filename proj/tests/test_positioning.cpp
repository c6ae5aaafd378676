#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "oori/positioning.hpp"
#include "oori/scenario.hpp"
#include "support.hpp"

using namespace oori;

namespace {

constexpr double kUeHeight = 1.5;

/// Noiseless measurements of every traced path from gNB 1 to `ue`.
std::vector<Measurement> observe(const Scene& s, const Point2& ue,
                                 const NoiseModel& noise = NoiseModel::noiseless()) {
  const auto recs = generate_dataset(s, {{0.0, ue, kUeHeight}}, RadioConfig{}, noise);
  for (const auto& r : recs) {
    if (r.gnb_id == 1) return r.measurements;
  }
  return {};
}

/// Horizontal wall above the gNB and a vertical wall beyond the UE: two
/// single bounces whose lines cross at right angles.
Scene two_walls() {
  return Scene({{Segment({-50, 10}, {50, 10}), 6.0}, {Segment({30, -20}, {30, 20}), 6.0}},
               {{1, {0, 0}, 10.0}});
}

/// Measurement of a bounce through `scatterer`, built by hand.
Measurement bounce(const Point2& gnb, const Point2& scatterer, const Point2& ue, int index) {
  Measurement m;
  m.path_index = index;
  m.gnb_id = 1;
  m.aod = bearing_from_to(gnb, scatterer);
  m.aoa = bearing_from_to(ue, scatterer);
  m.toa = (distance(gnb, scatterer) + distance(scatterer, ue)) / kSpeedOfLight;
  m.rss = -80.0 - index;
  m.label = 1;
  return m;
}

int always(int cls) { return cls; }

}  // namespace

TEST(Spherical, Examples) {
  const GnbSite g{1, {0, 0}, 0.0};
  auto p = spherical_to_cartesian_3d(g, {10, Bearing(0), 0});
  EXPECT_NEAR(p.x, 0, 1e-12);
  EXPECT_NEAR(p.y, 10, 1e-12);
  EXPECT_NEAR(p.z, 0, 1e-12);
  p = spherical_to_cartesian_3d(g, {10, Bearing(90), 0});
  EXPECT_NEAR(p.x, 10, 1e-12);
  EXPECT_NEAR(p.y, 0, 1e-12);
  p = spherical_to_cartesian_3d(g, {10, Bearing(0), 90 - 1e-7});
  EXPECT_NEAR(p.x, 0, 1e-12);
  EXPECT_NEAR(p.y, 0, 1e-6);
  EXPECT_NEAR(p.z, 10, 1e-9);
  EXPECT_THROW(spherical_to_cartesian_3d(g, {0, Bearing(0), 0}), DomainError);
}

TEST(LosPosition, Examples) {
  const Point2 a = los_position_2d({1, {0, 0}, 0.0}, 10, Bearing(90), 0.0);
  EXPECT_NEAR(a.x, 10, 1e-12);
  EXPECT_NEAR(a.y, 0, 1e-12);
  const Point2 b = los_position_2d({1, {100, 200}, 3.0}, 5, Bearing(0), 0.0);
  EXPECT_NEAR(b.x, 100, 1e-12);
  EXPECT_NEAR(b.y, 204, 1e-12);
  EXPECT_THROW(los_position_2d({1, {0, 0}, 3.0}, 2, Bearing(0), 0.0), DomainError);
}

TEST(ScattererPoint, Examples) {
  const Point2 a = scatterer_point({0, 0}, Bearing(45), std::sqrt(200.0));
  EXPECT_NEAR(a.x, 10, 1e-12);
  EXPECT_NEAR(a.y, 10, 1e-12);
  EXPECT_EQ(scatterer_point({3, 4}, Bearing(123), 0.0), (Point2{3, 4}));
  const Point2 c = scatterer_point({0, 0}, Bearing(0), 7);
  EXPECT_NEAR(c.x, 0, 1e-12);
  EXPECT_NEAR(c.y, 7, 1e-12);
}

TEST(SbrLine, ForwardConstructedExample) {
  const Point2 g{0, 0}, s{10, 10}, ue{20, 5};
  const Bearing beta = bearing_from_to(g, s);
  const Bearing alpha = bearing_from_to(ue, s);
  const double d = distance(g, s) + distance(s, ue);
  EXPECT_NEAR(beta.degrees(), 45.0, 1e-9);
  EXPECT_NEAR(angle_diff_deg(alpha.degrees(), -63.4349), 0.0, 1e-4);
  EXPECT_NEAR(d, 25.3224, 1e-4);
  const Line l = sbr_line(g, alpha, beta, d);
  EXPECT_LT(l.distance(ue), 1e-6);
  const auto ki = sbr_slope_intercept(g, alpha, beta, d);
  ASSERT_TRUE(ki);
  EXPECT_NEAR(ki->first, -6.1623, 1e-4);
  EXPECT_NEAR(ki->second, 128.25, 1e-2);
  EXPECT_TRUE(l.approx_equal(Line::from_slope_intercept(ki->first, ki->second), 1e-9));
}

TEST(SbrLine, VerticalAndCollinearCases) {
  const Line v = sbr_line({0, 0}, Bearing(-45), Bearing(45), 10 * std::sqrt(2.0));
  EXPECT_TRUE(v.approx_equal(Line::from_coefficients(1, 0, 10), 1e-12));
  EXPECT_FALSE(sbr_slope_intercept({0, 0}, Bearing(-45), Bearing(45), 10 * std::sqrt(2.0)));
  const Line h = sbr_line({0, 0}, Bearing(90), Bearing(90), 10);
  EXPECT_TRUE(h.approx_equal(Line::from_coefficients(0, 1, 0), 1e-12));
}

TEST(SbrLine, Errors) {
  EXPECT_THROW(sbr_line({0, 0}, Bearing(225), Bearing(45), 10), DegenerateGeometry);
  EXPECT_THROW(sbr_line({0, 0}, Bearing(10), Bearing(45), 0), DomainError);
}

TEST(SbrPosition, RecoversForwardConstructedUe) {
  const Point2 g{0, 0}, ue{20, 5};
  const GnbSite site{1, g, kUeHeight};
  const auto m1 = bounce(g, {10, 10}, ue, 0);
  const auto m2 = bounce(g, {25, -12}, ue, 1);
  const Point2 p = sbr_position(site, m1, m2, kUeHeight);
  EXPECT_NEAR(p.x, 20, 1e-6);
  EXPECT_NEAR(p.y, 5, 1e-6);
}

TEST(SbrPosition, IdenticalLinesAreParallel) {
  const GnbSite site{1, {0, 0}, kUeHeight};
  const auto m = bounce({0, 0}, {10, 10}, {20, 5}, 0);
  EXPECT_THROW(sbr_position(site, m, m, kUeHeight), ParallelLines);
  auto other = m;
  other.gnb_id = 2;
  EXPECT_THROW(sbr_position(site, m, other, kUeHeight), DataError);
}

TEST(SbrPosition, CorridorBouncesGiveParallelLines) {
  // both walls share one normal, so every SBR line is the same vertical
  // line through the UE
  SceneParams p;
  p.length = 300;
  const Scene s = generate_scene(SceneKind::Corridor, p);
  const auto ms = observe(s, {40, 0});
  std::vector<Measurement> sbr;
  for (const auto& m : ms) {
    if (m.label == 1) sbr.push_back(m);
  }
  ASSERT_EQ(sbr.size(), 2u);
  for (const auto& m : sbr) EXPECT_LT(sbr_line(s.gnb(1), m, kUeHeight).distance({40, 0}), 1e-9);
  EXPECT_THROW(sbr_position(s.gnb(1), sbr[0], sbr[1], kUeHeight), ParallelLines);
}

TEST(PositioningProperty, UeLiesOnItsSbrLine) {
  std::mt19937_64 rng(41);
  for (int i = 0; i < 2000; ++i) {
    const auto c = fixtures::random_bounce_case(rng);
    const Line l = sbr_line(c.gnb, c.path.aoa, c.path.aod, c.path.length);
    EXPECT_LT(l.distance(c.ue), 1e-9);
  }
}

TEST(PositioningProperty, GeneralFormMatchesSlopeIntercept) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> ang(0, 360);
  std::uniform_real_distribution<double> len(1, 300);
  int checked = 0;
  for (int i = 0; i < 20000; ++i) {
    const Point2 g = fixtures::random_point(rng, -200, 200);
    const Bearing a(ang(rng)), b(ang(rng));
    const double d = len(rng);
    const auto ki = sbr_slope_intercept(g, a, b, d, 1e-6);
    if (!ki) continue;
    const Line ref = Line::from_slope_intercept(ki->first, ki->second);
    EXPECT_TRUE(sbr_line(g, a, b, d).approx_equal(ref, 1e-9)) << i;
    ++checked;
  }
  EXPECT_GT(checked, 19000);
}

TEST(PositioningProperty, LosRecoversTruth) {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> h(0, 30);
  for (int i = 0; i < 5000; ++i) {
    const GnbSite g{1, fixtures::random_point(rng, -500, 500), h(rng)};
    const Point2 ue = fixtures::random_point(rng, -500, 500);
    if (distance(g.position, ue) < 1e-3) continue;
    const double z = h(rng);
    const double r3 = std::hypot(distance(g.position, ue), g.height - z);
    const Point2 p = los_position_2d(g, r3, bearing_from_to(g.position, ue), z);
    EXPECT_LT(distance(p, ue), 1e-9);
  }
}

TEST(PositioningProperty, RssOffsetKeepsSelection) {
  std::mt19937_64 rng(44);
  std::uniform_real_distribution<double> off(-50, 50);
  const Scene s = generate_scene(SceneKind::ManhattanBlock, SceneParams{});
  int fixes = 0;
  for (int i = 0; i < 200; ++i) {
    const Point2 ue{std::uniform_real_distribution<double>(0, 250)(rng), 0.0};
    auto ms = observe(s, ue, NoiseModel{0.1, 1, 1, static_cast<std::uint64_t>(i)});
    const auto a = pipeline_step(ms, oracle_classifier(), s.gnb(1), kUeHeight);
    const double o = off(rng);
    for (auto& m : ms) m.rss += o;
    const auto b = pipeline_step(ms, oracle_classifier(), s.gnb(1), kUeHeight);
    ASSERT_EQ(a.index(), b.index());
    if (const auto* fa = std::get_if<PositionFix>(&a)) {
      const auto& fb = std::get<PositionFix>(b);
      EXPECT_EQ(fa->contributing, fb.contributing);
      EXPECT_EQ(fa->method, fb.method);
      ++fixes;
    }
  }
  EXPECT_GT(fixes, 100);
}

TEST(Pipeline, TwoPredictedSbrPathsGiveExactFix) {
  const Scene s = two_walls();
  const Point2 ue{20, -3};
  const auto ms = observe(s, ue);
  const auto r = pipeline_step(ms, oracle_classifier(), s.gnb(1), kUeHeight);
  const auto* fix = std::get_if<PositionFix>(&r);
  ASSERT_TRUE(fix);
  EXPECT_EQ(fix->method, Method::SBR);
  EXPECT_LT(distance(fix->p, ue), 1e-6);
  EXPECT_EQ(fix->contributing.size(), 2u);
}

TEST(Pipeline, NoPredictedSbrFallsBackToStrongestTwo) {
  const Scene s = two_walls();
  const auto ms = observe(s, {20, -3});
  const auto r = pipeline_step(ms, [](const Measurement&) { return always(2); }, s.gnb(1),
                               kUeHeight);
  const auto* fix = std::get_if<PositionFix>(&r);
  ASSERT_TRUE(fix);
  EXPECT_EQ(fix->method, Method::FallbackStrongestTwo);
}

TEST(Pipeline, EmptyOrSingleEpochIsOutage) {
  const Scene s = two_walls();
  EXPECT_TRUE(std::holds_alternative<Outage>(
      pipeline_step(std::vector<Measurement>{}, oracle_classifier(), s.gnb(1), kUeHeight)));
  const auto ms = observe(s, {20, -3});
  const std::vector<Measurement> one{ms.front()};
  EXPECT_TRUE(std::holds_alternative<Outage>(
      pipeline_step(one, oracle_classifier(), s.gnb(1), kUeHeight)));
}

TEST(Pipeline, LosPreferredUsesLineOfSight) {
  const Scene s = two_walls();
  const Point2 ue{20, -3};
  const auto ms = observe(s, ue);
  PipelineOptions opts;
  opts.mode = Mode::LosPreferred;
  const auto r = pipeline_step(ms, oracle_classifier(), s.gnb(1), kUeHeight, opts);
  const auto& fix = std::get<PositionFix>(r);
  EXPECT_EQ(fix.method, Method::LoS);
  EXPECT_LT(distance(fix.p, ue), 1e-9);
}

TEST(Pipeline, MixedEpochsAreRejected) {
  const Scene s = two_walls();
  auto ms = observe(s, {20, -3});
  ms[1].t = 5.0;
  EXPECT_THROW(pipeline_step(ms, oracle_classifier(), s.gnb(1), kUeHeight), DataError);
}

TEST(Baselines, ShareTheFallback) {
  const Scene s = two_walls();
  const auto ms = observe(s, {20, -3});
  const auto a = baseline_strongest_two(ms, s.gnb(1), kUeHeight);
  EXPECT_EQ(std::get<PositionFix>(a).method, Method::FallbackStrongestTwo);
  const auto none = baseline_rss_threshold(ms, 0.0, s.gnb(1), kUeHeight);
  EXPECT_EQ(std::get<PositionFix>(none).method, Method::FallbackStrongestTwo);
  const auto all = baseline_rss_threshold(ms, 1e9, s.gnb(1), kUeHeight);
  EXPECT_EQ(std::get<PositionFix>(all).method, Method::SBR);
  EXPECT_EQ(std::get<PositionFix>(all).contributing, std::get<PositionFix>(a).contributing);
}

TEST(FixesFile, RoundTrip) {
  std::vector<FixRow> rows;
  rows.push_back(to_fix_row(PositionFix{0.5, 1, {1, 2}, Method::SBR, {0, 1}}, 0.5, 1, {1, 3}));
  rows.push_back(to_fix_row(Outage{0.6, 2, "x"}, 0.6, 2, {4, 5}));
  rows.push_back(to_fix_row(PositionFix{0.7, 1, {0.1, 0.2}, Method::LoS, {0}}, 0.7, 1, {0.1, 0.2}));
  EXPECT_DOUBLE_EQ(rows[0].err, 1.0);
  const std::string path = ::testing::TempDir() + "fixes.csv";
  {
    std::ofstream out(path);
    write_fixes(out, rows);
  }
  const auto back = read_fixes(path);
  ASSERT_EQ(back.size(), 3u);
  EXPECT_EQ(back[0].method, Method::SBR);
  EXPECT_EQ(back[0].est, (Point2{1, 2}));
  EXPECT_FALSE(back[1].method);
  EXPECT_EQ(back[1].truth, (Point2{4, 5}));
  EXPECT_EQ(back[2].method, Method::LoS);
  EXPECT_EQ(back[2].err, 0.0);
}

TEST(FixesFile, RejectsUnknownMethod) {
  const std::string path = ::testing::TempDir() + "badfixes.csv";
  std::ofstream(path) << "t,gnb_id,method,x_est,y_est,x_true,y_true,err_m\n0,1,Magic,0,0,0,0,0\n";
  EXPECT_THROW(read_fixes(path), DataError);
}
