// SPDX-License-Identifier: Apache-2.0
#include "vesnav/geometry/geometry.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"

namespace vesnav::geometry {
namespace {

using sim::BinaryImage;

BinaryImage block(int rows, int cols, int r0, int c0, int h, int w) {
  BinaryImage m(rows, cols);
  for (int r = r0; r < r0 + h; ++r)
    for (int c = c0; c < c0 + w; ++c) m.set(r, c, true);
  return m;
}

double polygon_area(const Polygon& p) {
  double a = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) a += cross(p[i], p[(i + 1) % p.size()]);
  return 0.5 * a;
}

BinaryImage random_blob(std::mt19937_64& rng, int size) {
  BinaryImage m(size, size);
  const int disks = 1 + static_cast<int>(uniform_index(rng, 4));
  for (int k = 0; k < disks; ++k) {
    const double cx = uniform(rng, 4, size - 4), cy = uniform(rng, 4, size - 4);
    const double rad = uniform(rng, 0.5, size / 4.0);
    for (int r = 0; r < size; ++r)
      for (int c = 0; c < size; ++c)
        if (std::hypot(c + 0.5 - cx, r + 0.5 - cy) <= rad) m.set(r, c, true);
  }
  if (m.empty()) m.set(size / 2, size / 2, true);
  return m;
}

std::vector<testing::Pt> to_pts(const std::vector<Vec2>& v) {
  std::vector<testing::Pt> out;
  for (auto p : v) out.push_back({p.x, p.y});
  return out;
}

TEST(ConvexHullTest, BlockHullIsItsOutline) {
  const auto hull = convex_hull(block(16, 16, 2, 3, 2, 3));
  ASSERT_EQ(hull.size(), 4u);
  EXPECT_DOUBLE_EQ(polygon_area(hull), 6.0);
}

TEST(ConvexHullTest, CounterClockwiseWithoutCollinearVertices) {
  const std::vector<Vec2> pts = {{0, 0}, {1, 0}, {2, 0}, {2, 1}, {2, 2}, {1, 1}, {0, 2}, {1, 2}};
  const auto hull = convex_hull(pts);
  EXPECT_EQ(hull.size(), 4u);
  EXPECT_DOUBLE_EQ(polygon_area(hull), 4.0);
}

TEST(ConvexHullTest, EmptyInputThrows) {
  EXPECT_THROW(convex_hull(std::span<const Vec2>{}), GeometryError);
  EXPECT_THROW(convex_hull(BinaryImage(8, 8)), GeometryError);
}

TEST(ConvexHullTest, RowExtremesGiveTheSameHullAsAllCorners) {
  std::mt19937_64 rng(4);
  for (int k = 0; k < 100; ++k) {
    const auto m = random_blob(rng, 32);
    const auto fast = convex_hull(m);
    std::vector<Vec2> all;
    for (auto p : testing::all_pixel_corners(m)) all.push_back({p.x, p.y});
    EXPECT_NEAR(polygon_area(fast), polygon_area(convex_hull(all)), 1e-9);
    EXPECT_GE(polygon_area(fast), static_cast<double>(m.area()) - 1e-9);
  }
}

TEST(MinAreaRectTest, AxisAlignedBlock) {
  const auto rect = min_area_rect(convex_hull(block(16, 16, 5, 1, 3, 10)));
  EXPECT_NEAR(rect.H_px, 3.0, 1e-12);
  EXPECT_NEAR(rect.W_px, 10.0, 1e-12);
  EXPECT_NEAR(rect.angle_deg, 0.0, 1e-9);
  EXPECT_NEAR(rect.center_px.x, 6.0, 1e-12);
  EXPECT_NEAR(rect.center_px.y, 6.5, 1e-12);
}

TEST(MinAreaRectTest, SinglePixelIsAUnitSquare) {
  const auto rect = min_area_rect(convex_hull(block(8, 8, 4, 4, 1, 1)));
  EXPECT_NEAR(rect.area(), 1.0, 1e-12);
}

TEST(MinAreaRectTest, RotatedRectangleIsRecovered) {
  for (double angle : {15.0, 30.0, 45.0, 120.0}) {
    const OrientedRect truth{{20, 20}, 4.0, 10.0, angle};
    const auto c = truth.corners();
    const std::vector<Vec2> pts(c.begin(), c.end());
    const auto rect = min_area_rect(convex_hull(pts));
    EXPECT_NEAR(rect.H_px, 4.0, 1e-9);
    EXPECT_NEAR(rect.W_px, 10.0, 1e-9);
    EXPECT_NEAR(rect.angle_deg, angle, 1e-9);
    EXPECT_NEAR(rect.center_px.x, 20.0, 1e-9);
    EXPECT_NEAR(rect.center_px.y, 20.0, 1e-9);
  }
}

TEST(MinAreaRectTest, DegenerateHullHasZeroHeight) {
  const std::vector<Vec2> pts = {{0, 0}, {3, 4}};
  const auto rect = min_area_rect(convex_hull(pts));
  EXPECT_DOUBLE_EQ(rect.H_px, 0.0);
  EXPECT_NEAR(rect.W_px, 5.0, 1e-12);
  EXPECT_THROW(termination_ratio(rect, 1), GeometryError);
}

TEST(MinAreaRectTest, AgreesWithAnAngleSweep) {
  std::mt19937_64 rng(17);
  for (int k = 0; k < 500; ++k) {
    const auto m = random_blob(rng, 32);
    const auto rect = min_area_rect(convex_hull(m));
    const auto sweep = testing::sweep_min_rect(testing::all_pixel_corners(m), 0.1);
    const double rel = (rect.area() - sweep.area) / sweep.area;
    ASSERT_LE(rel, 1e-6) << "blob " << k;
    ASSERT_GE(rel, -5e-3) << "blob " << k;
    ASSERT_LE(rect.H_px, rect.W_px + 1e-12);
  }
}

TEST(MinAreaRectTest, NeverLargerThanTheBoundingBox) {
  std::mt19937_64 rng(23);
  for (int k = 0; k < 200; ++k) {
    const auto m = random_blob(rng, 24);
    const auto pts = to_pts(mask_corner_points(m));
    double x0 = 1e9, x1 = -1e9, y0 = 1e9, y1 = -1e9;
    for (auto p : pts) {
      x0 = std::min(x0, p.x), x1 = std::max(x1, p.x);
      y0 = std::min(y0, p.y), y1 = std::max(y1, p.y);
    }
    const auto rect = min_area_rect(convex_hull(m));
    EXPECT_LE(rect.area(), (x1 - x0) * (y1 - y0) + 1e-9);
    EXPECT_GE(rect.area(), static_cast<double>(m.area()) - 1e-9);
  }
}

TEST(TerminationRatioTest, RectangleAndEllipse) {
  EXPECT_NEAR(termination_ratio({{0, 0}, 10, 20, 0}, 190), 0.05, 1e-12);
  EXPECT_NEAR(termination_ratio({{0, 0}, 10, 20, 0}, 100), 0.5, 1e-12);

  BinaryImage ellipse(256, 256);
  for (int r = 0; r < 256; ++r)
    for (int c = 0; c < 256; ++c) {
      const double u = (c + 0.5 - 128) / 100.0, v = (r + 0.5 - 128) / 50.0;
      if (u * u + v * v <= 1.0) ellipse.set(r, c, true);
    }
  const auto rect = min_area_rect(convex_hull(ellipse));
  EXPECT_NEAR(termination_ratio(rect, ellipse.area()), 1.0 - std::numbers::pi / 4.0, 0.01);
}

TEST(TerminationRatioTest, StaysInUnitInterval) {
  std::mt19937_64 rng(31);
  for (int k = 0; k < 300; ++k) {
    const auto m = random_blob(rng, 32);
    const auto rect = min_area_rect(convex_hull(m));
    const double ratio = termination_ratio(rect, m.area());
    EXPECT_GE(ratio, -1e-12);
    EXPECT_LT(ratio, 1.0);
  }
}

TEST(DiameterTest, RunningMeanOfHeights) {
  DiameterTracker t;
  t = update_diameter(t, {{0, 0}, 4, 10, 0});
  t = update_diameter(t, {{0, 0}, 6, 10, 0});
  t = update_diameter(t, {{0, 0}, 11, 12, 0});
  EXPECT_EQ(t.count, 3);
  EXPECT_DOUBLE_EQ(t.d_v_px, 7.0);
}

TEST(CheckTerminationTest, ConditionsAreConjunctive) {
  DiameterTracker t;
  const OrientedRect band{{32, 32}, 10, 64, 0};
  t = update_diameter(t, band);
  EXPECT_TRUE(check_termination(band, 640, t, 64));
  EXPECT_FALSE(check_termination(band, 500, t, 64));  // ratio 0.22
  const OrientedRect narrow{{32, 32}, 10, 60, 0};
  EXPECT_FALSE(check_termination(narrow, 600, t, 64));
  DiameterTracker wide;
  wide = update_diameter(wide, {{0, 0}, 20, 64, 0});
  wide = update_diameter(wide, band);  // d_v = 15, H = 10, threshold 2.5
  EXPECT_FALSE(check_termination(band, 640, wide, 64));
  EXPECT_FALSE(check_termination(band, 640, DiameterTracker{}, 64));
  EXPECT_FALSE(check_termination(band, 0, t, 64));
}

TEST(CheckTerminationTest, HeightThresholdScalesWithImageWidth) {
  TerminationParams p;
  EXPECT_DOUBLE_EQ(p.height_threshold_px(256), 10.0);
  EXPECT_DOUBLE_EQ(p.height_threshold_px(64), 2.5);
}

TEST(ViewRecognizerTest, LongitudinalTerminatesTransverseDoesNot) {
  auto env = sim::generate_environment(3, {}, {});
  const auto& v = env.vessel;
  const auto lon = sim::render_slice(v, sim::make_pose(v.anchor_mm.x, v.anchor_mm.y,
                                                       v.direction_deg, env.bounds),
                                     env.bounds);
  const auto tra = sim::render_slice(v, sim::make_pose(v.anchor_mm.x, v.anchor_mm.y,
                                                       v.direction_deg + 90, env.bounds),
                                     env.bounds);
  ViewRecognizer a(3.125, 64);
  EXPECT_TRUE(a.observe(lon).terminated);
  ViewRecognizer b(3.125, 64);
  const auto f = b.observe(tra);
  EXPECT_TRUE(f.vessel_present);
  EXPECT_FALSE(f.terminated);
  ViewRecognizer c(3.125, 64);
  const auto e = c.observe(BinaryImage(64, 64));
  EXPECT_FALSE(e.vessel_present);
  EXPECT_FALSE(e.terminated);
  EXPECT_EQ(c.tracker().count, 0);
}

TEST(ViewRecognizerTest, SmallBlobsDoNotTouchTheTracker) {
  ViewRecognizer r(3.125, 64);
  const auto f = r.observe(block(64, 64, 10, 10, 1, 3));
  EXPECT_FALSE(f.vessel_present);
  EXPECT_EQ(r.tracker().count, 0);
  r.observe(block(64, 64, 10, 10, 2, 2));
  EXPECT_EQ(r.tracker().count, 1);
  r.reset();
  EXPECT_EQ(r.tracker().count, 0);
}

TEST(DistanceTest, MatchesDenseSampling) {
  std::mt19937_64 rng(8);
  for (int k = 0; k < 200; ++k) {
    const Vec2 q{uniform(rng, 0, 100), uniform(rng, 0, 60)};
    const auto line = Line2D::from_angle(q, uniform(rng, 0, 180));
    const Vec2 p{uniform(rng, 0, 100), uniform(rng, 0, 60)};
    const double dense = testing::sampled_line_distance(
        {p.x, p.y}, {q.x, q.y}, {line.direction.x, line.direction.y}, 300.0, 600001);
    EXPECT_NEAR(distance_to_line(p, line), dense, 1e-3);
  }
  EXPECT_DOUBLE_EQ(distance_to_line({3, 4}, Line2D::through({0, 0}, {1, 0})), 4.0);
}

TEST(OrientationTest, AcuteAngleBetweenAxes) {
  const auto l10 = Line2D::from_angle({0, 0}, 10);
  EXPECT_NEAR(orientation_error(170, l10), 20.0, 1e-9);
  EXPECT_NEAR(orientation_error(190, l10), 0.0, 1e-9);
  EXPECT_NEAR(orientation_error(100, l10), 90.0, 1e-9);
  EXPECT_NEAR(orientation_error(355, l10), 15.0, 1e-9);
  std::mt19937_64 rng(2);
  for (int k = 0; k < 1000; ++k) {
    const double e = orientation_error(uniform(rng, 0, 360), Line2D::from_angle({0, 0}, uniform(rng, 0, 180)));
    ASSERT_GE(e, 0.0);
    ASSERT_LE(e, 90.0);
  }
}

TEST(FitCenterlineTest, ExactLine) {
  const std::vector<Vec2> pts = {{0, 0}, {1, 2}, {2, 4}, {3, 6}};
  const auto line = fit_centerline(pts);
  EXPECT_NEAR(line.angle_deg(), rad_to_deg(std::atan(2.0)), 1e-9);
  EXPECT_NEAR(distance_to_line({5, 10}, line), 0.0, 1e-9);
  const std::vector<Vec2> two = {{1, 1}, {1, 5}};
  EXPECT_NEAR(fit_centerline(two).angle_deg(), 90.0, 1e-9);
}

TEST(FitCenterlineTest, DegenerateInputThrows) {
  const std::vector<Vec2> one = {{1, 1}};
  EXPECT_THROW(fit_centerline(one), GeometryError);
  const std::vector<Vec2> same = {{1, 1}, {1, 1}, {1, 1}};
  EXPECT_THROW(fit_centerline(same), GeometryError);
}

TEST(FitCenterlineTest, NoisyPointsWithinTwoDegrees) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 0.3);
  for (int k = 0; k < 50; ++k) {
    const double angle = uniform(rng, 0, 180);
    const auto truth = Line2D::from_angle({50, 30}, angle);
    std::vector<Vec2> pts;
    for (int i = -10; i <= 10; ++i) {
      pts.push_back(truth.point + (2.0 * i) * truth.direction + Vec2{noise(rng), noise(rng)});
    }
    EXPECT_LE(orientation_error(angle, fit_centerline(pts)), 2.0);
  }
}

TEST(FitCenterlineTest, RotatingThePointsRotatesTheLine) {
  std::mt19937_64 rng(6);
  std::vector<Vec2> pts;
  for (int i = 0; i < 12; ++i) pts.push_back({uniform(rng, 0, 20), uniform(rng, 0, 5) + i});
  const double base = fit_centerline(pts).angle_deg();
  for (double rot : {25.0, 90.0, 143.0}) {
    const double a = deg_to_rad(rot);
    std::vector<Vec2> turned;
    for (auto p : pts) {
      turned.push_back({std::cos(a) * p.x - std::sin(a) * p.y, std::sin(a) * p.x + std::cos(a) * p.y});
    }
    const auto line = fit_centerline(turned);
    EXPECT_NEAR(orientation_error(base + rot, line), 0.0, 1e-7);
  }
}

}  // namespace
}  // namespace vesnav::geometry
