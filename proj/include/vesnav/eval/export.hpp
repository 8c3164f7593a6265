// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vesnav/agent/episode.hpp"

namespace vesnav::eval {

inline constexpr std::uint8_t kOverlayGray = 128;

// Writes `trajectory.csv` into `dir` and, when the record kept its frames,
// `frame_NNNN.pgm` per row with the bounding rectangle drawn in gray 128.
// Mask pixels stay 255, so thresholding at 255 recovers the frame.
void export_trajectory(const agent::EpisodeRecord& record, const std::string& dir);

std::string trajectory_csv(const agent::EpisodeRecord& record);

struct CsvRow {
  int step = 0;
  double x_mm = 0.0;
  double y_mm = 0.0;
  double yaw_deg = 0.0;
  std::string action;
  std::int64_t area_px = 0;
  double nu_dis = 0.0;
  double nu_ves = 0.0;
  double nu = 0.0;
  double reward = 0.0;
  std::optional<double> R_ter;
  std::optional<double> H_t;
  std::optional<double> W_t;
  double d_v = 0.0;
};

std::vector<CsvRow> read_trajectory_csv(const std::string& path);

// Gray frame with the rectangle edges drawn over background pixels.
std::vector<std::uint8_t> frame_with_overlay(const sim::BinaryImage& mask,
                                             const std::optional<geometry::OrientedRect>& rect);
sim::BinaryImage mask_from_gray(const std::vector<std::uint8_t>& gray, int rows, int cols);

}  // namespace vesnav::eval
