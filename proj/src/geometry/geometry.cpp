// SPDX-License-Identifier: Apache-2.0
#include "vesnav/geometry/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace vesnav::geometry {
namespace {

double normalized_angle(Vec2 d) { return wrap_angle(rad_to_deg(std::atan2(d.y, d.x)), 180.0); }

Vec2 unit(Vec2 v) {
  const double n = norm(v);
  return {v.x / n, v.y / n};
}

}  // namespace

std::array<Vec2, 4> OrientedRect::corners() const {
  const double a = deg_to_rad(angle_deg);
  const Vec2 u{std::cos(a), std::sin(a)};
  const Vec2 v{-u.y, u.x};
  const Vec2 hu = 0.5 * W_px * u;
  const Vec2 hv = 0.5 * H_px * v;
  return {center_px - hu - hv, center_px + hu - hv, center_px + hu + hv, center_px - hu + hv};
}

DiameterTracker update_diameter(DiameterTracker tracker, const OrientedRect& rect) {
  tracker.sum_H_px += rect.H_px;
  tracker.count += 1;
  tracker.d_v_px = tracker.sum_H_px / static_cast<double>(tracker.count);
  return tracker;
}

Line2D Line2D::through(Vec2 p1, Vec2 p2) {
  const Vec2 d = p2 - p1;
  if (norm(d) == 0.0) throw GeometryError("line needs two distinct points");
  return {p1, unit(d)};
}

Line2D Line2D::from_angle(Vec2 point, double angle_deg) {
  const double a = deg_to_rad(angle_deg);
  return {point, {std::cos(a), std::sin(a)}};
}

double Line2D::angle_deg() const { return normalized_angle(direction); }

std::vector<Vec2> mask_corner_points(const sim::BinaryImage& mask) {
  std::vector<Vec2> pts;
  for (int r = 0; r < mask.rows(); ++r) {
    int left = -1;
    int right = -1;
    for (int c = 0; c < mask.cols(); ++c) {
      if (!mask.at(r, c)) continue;
      if (left < 0) left = c;
      right = c;
    }
    if (left < 0) continue;
    pts.push_back({double(left), double(r)});
    pts.push_back({double(left), double(r + 1)});
    pts.push_back({double(right + 1), double(r)});
    pts.push_back({double(right + 1), double(r + 1)});
  }
  return pts;
}

Polygon convex_hull(std::span<const Vec2> points) {
  if (points.empty()) throw GeometryError("convex hull of an empty point set");
  std::vector<Vec2> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(),
            [](Vec2 a, Vec2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;

  // Andrew's monotone chain; popping on cross <= 0 drops collinear vertices.
  Polygon hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0) --k;
    hull[k++] = p;
  }
  const std::size_t lower = k + 1;
  for (auto it = pts.rbegin() + 1; it != pts.rend(); ++it) {
    while (k >= lower && cross(hull[k - 1] - hull[k - 2], *it - hull[k - 2]) <= 0) --k;
    hull[k++] = *it;
  }
  hull.resize(k - 1);
  return hull;
}

Polygon convex_hull(const sim::BinaryImage& mask) {
  const auto pts = mask_corner_points(mask);
  return convex_hull(std::span<const Vec2>(pts));
}

OrientedRect min_area_rect(const Polygon& hull) {
  if (hull.empty()) throw GeometryError("minimum rectangle of an empty hull");
  const std::size_t n = hull.size();
  if (n == 1) return {hull[0], 0.0, 0.0, 0.0};
  if (n == 2) {
    const Vec2 d = hull[1] - hull[0];
    return {0.5 * (hull[0] + hull[1]), 0.0, norm(d), normalized_angle(d)};
  }

  auto at = [&](std::size_t i) { return hull[i % n]; };
  OrientedRect best;
  double best_area = -1.0;
  // j: farthest along the edge, k: farthest from the edge, l: farthest against the edge.
  std::size_t j = 1;
  std::size_t k = 1;
  std::size_t l = 1;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 origin = at(i);
    const Vec2 e = unit(at(i + 1) - origin);
    const Vec2 nrm{-e.y, e.x};
    if (i == 0) j = 1;
    while (dot(at(j + 1) - at(j), e) > 0) ++j;
    if (i == 0) k = j;
    while (dot(at(k + 1) - at(k), nrm) > 0) ++k;
    if (i == 0) l = k;
    while (dot(at(l + 1) - at(l), e) < 0) ++l;

    const double e_max = dot(at(j) - origin, e);
    const double e_min = dot(at(l) - origin, e);
    const double height = dot(at(k) - origin, nrm);
    const double length = e_max - e_min;
    const double area = length * height;

    OrientedRect cand;
    cand.center_px = origin + (0.5 * (e_max + e_min)) * e + (0.5 * height) * nrm;
    const double along = normalized_angle(e);
    const double across = normalized_angle(nrm);
    if (length > height) {
      cand = {cand.center_px, height, length, along};
    } else if (height > length) {
      cand = {cand.center_px, length, height, across};
    } else {
      cand = {cand.center_px, length, height, std::min(along, across)};
    }

    const double tol = 1e-9 * std::max(1.0, best_area);
    if (best_area < 0 || area < best_area - tol ||
        (std::abs(area - best_area) <= tol && cand.angle_deg < best.angle_deg)) {
      best = cand;
      best_area = area;
    }
  }
  return best;
}

double termination_ratio(const OrientedRect& rect, std::int64_t D_t) {
  const double area = rect.area();
  if (!(area > 0.0)) throw GeometryError("termination ratio of a zero-area rectangle");
  return (area - static_cast<double>(D_t)) / area;
}

bool check_termination(const OrientedRect& rect, std::int64_t D_t, const DiameterTracker& tracker,
                       int image_W_px, const TerminationParams& params) {
  if (D_t <= 0 || !(rect.area() > 0.0) || tracker.count == 0) return false;
  const bool rectangular = termination_ratio(rect, D_t) < params.ratio_bound;
  const bool full_height = tracker.d_v_px - rect.H_px < params.height_threshold_px(image_W_px);
  const bool full_width = rect.W_px > params.width_fraction * image_W_px;
  return rectangular && full_height && full_width;
}

double distance_to_line(Vec2 p, const Line2D& line) {
  const Vec2 p1 = line.point;
  const Vec2 p2 = line.point + line.direction;
  return std::abs(cross(p - p1, p - p2)) / norm(p2 - p1);
}

double orientation_error(double pose_yaw_deg, const Line2D& line) {
  const double diff = wrap_angle(pose_yaw_deg - line.angle_deg(), 180.0);
  return std::min(diff, 180.0 - diff);
}

Line2D fit_centerline(std::span<const Vec2> centers) {
  if (centers.size() < 2) throw GeometryError("centerline fit needs at least two points");
  Vec2 mean{};
  for (const auto& p : centers) mean = mean + p;
  mean = (1.0 / static_cast<double>(centers.size())) * mean;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (const auto& p : centers) {
    const Vec2 d = p - mean;
    sxx += d.x * d.x;
    sxy += d.x * d.y;
    syy += d.y * d.y;
  }
  if (sxx + syy == 0.0) throw GeometryError("centerline fit on coincident points");
  // Principal axis of the 2x2 scatter matrix.
  const double theta = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
  return {mean, {std::cos(theta), std::sin(theta)}};
}

ViewRecognizer::ViewRecognizer(double vessel_threshold_px, int image_W_px,
                               TerminationParams params)
    : vessel_threshold_px_(vessel_threshold_px), image_W_px_(image_W_px), params_(params) {}

FrameAnalysis ViewRecognizer::observe(const sim::BinaryImage& mask) {
  FrameAnalysis out;
  out.d_v_px = tracker_.d_v_px;
  if (mask.empty() || static_cast<double>(mask.area()) < vessel_threshold_px_) return out;
  out.vessel_present = true;
  out.rect = min_area_rect(convex_hull(mask));
  tracker_ = update_diameter(tracker_, *out.rect);
  out.d_v_px = tracker_.d_v_px;
  if (out.rect->area() > 0.0) {
    out.ratio = termination_ratio(*out.rect, mask.area());
    out.terminated = check_termination(*out.rect, mask.area(), tracker_, image_W_px_, params_);
  }
  return out;
}

}  // namespace vesnav::geometry
