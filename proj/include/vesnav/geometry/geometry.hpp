// SPDX-License-Identifier: Apache-2.0
//
// Geometry kernel for standard-view recognition and pose metrics.
//
// Image coordinates: x = column, y = row (growing with depth). Every set pixel
// is the unit square [col, col+1] x [row, row+1], so a filled h x w block has
// hull extents of exactly h x w.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "vesnav/common.hpp"
#include "vesnav/sim/vessel_sim.hpp"

namespace vesnav::geometry {

using Polygon = std::vector<Vec2>;

struct OrientedRect {
  Vec2 center_px;
  double H_px = 0.0;       // shorter side
  double W_px = 0.0;       // longer side
  double angle_deg = 0.0;  // orientation of the W side, [0, 180)

  double area() const { return H_px * W_px; }
  std::array<Vec2, 4> corners() const;
};

struct DiameterTracker {
  double sum_H_px = 0.0;
  std::int64_t count = 0;
  double d_v_px = 0.0;
};

DiameterTracker update_diameter(DiameterTracker tracker, const OrientedRect& rect);

struct Line2D {
  Vec2 point;
  Vec2 direction;  // unit

  static Line2D through(Vec2 p1, Vec2 p2);
  static Line2D from_angle(Vec2 point, double angle_deg);
  double angle_deg() const;  // [0, 180)
};

// Row-extreme pixel-square corners; their hull equals the hull of all corners.
std::vector<Vec2> mask_corner_points(const sim::BinaryImage& mask);

// Counter-clockwise hull without collinear vertices. Throws GeometryError on empty input.
Polygon convex_hull(std::span<const Vec2> points);
Polygon convex_hull(const sim::BinaryImage& mask);

// Rotating calipers over a convex CCW polygon. Degenerate hulls give H = 0.
OrientedRect min_area_rect(const Polygon& hull);

// (H*W - D_t) / (H*W). Throws GeometryError on a zero-area rectangle.
double termination_ratio(const OrientedRect& rect, std::int64_t D_t);

struct TerminationParams {
  double ratio_bound = 0.1;
  double height_threshold_px_at_256 = 10.0;
  double width_fraction = 0.99;  // alpha
  static constexpr double kReferenceWidthPx = 256.0;

  double height_threshold_px(int image_W_px) const {
    return height_threshold_px_at_256 * image_W_px / kReferenceWidthPx;
  }
};

bool check_termination(const OrientedRect& rect, std::int64_t D_t, const DiameterTracker& tracker,
                       int image_W_px, const TerminationParams& params = {});

double distance_to_line(Vec2 p, const Line2D& line);

// Acute angle in [0, 90] between the probe's lateral axis and the line.
double orientation_error(double pose_yaw_deg, const Line2D& line);

// Total-least-squares fit. Throws GeometryError when all points coincide.
Line2D fit_centerline(std::span<const Vec2> centers);

// Per-frame analysis with the running diameter estimate across an episode.
struct FrameAnalysis {
  bool vessel_present = false;
  std::optional<OrientedRect> rect;
  double ratio = 0.0;  // meaningful only when rect is set
  double d_v_px = 0.0;
  bool terminated = false;
};

class ViewRecognizer {
 public:
  ViewRecognizer(double vessel_threshold_px, int image_W_px, TerminationParams params = {});

  void reset() { tracker_ = {}; }
  // Frames below the vessel threshold leave the tracker untouched and never terminate.
  FrameAnalysis observe(const sim::BinaryImage& mask);
  const DiameterTracker& tracker() const { return tracker_; }

 private:
  double vessel_threshold_px_;
  int image_W_px_;
  TerminationParams params_;
  DiameterTracker tracker_;
};

}  // namespace vesnav::geometry
