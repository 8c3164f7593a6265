// SPDX-License-Identifier: Apache-2.0
//
// Procedural vessel environments for probe navigation.
//
// World frame: x/y span the operation surface (OS), z points up, so tissue lies
// at negative z. The vessel is an infinite straight cylinder whose centerline
// runs parallel to the OS at a fixed depth. The probe stands on the OS and its
// image plane is vertical, spanned by the probe's lateral axis and depth.
#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vesnav/common.hpp"

namespace vesnav::sim {

struct EnvBounds {
  double width_mm = 100.0;
  double height_mm = 60.0;
  double image_depth_mm = 40.0;
  double image_width_mm = 40.0;
  int image_rows = 64;  // H
  int image_cols = 64;  // W

  double pitch_mm() const { return image_width_mm / image_cols; }
  int pixel_count() const { return image_rows * image_cols; }
  // Throws ConfigError when any invariant is violated.
  void validate() const;
};

// Parameter ranges used by generate_environment.
struct VesselRanges {
  double radius_min_mm = 2.5;
  double radius_max_mm = 5.0;
  double depth_min_mm = 10.0;
  double depth_max_mm = 25.0;
  double anchor_fraction = 0.8;  // anchor sampled over this central fraction of the OS
};

struct VesselSpec {
  Vec2 anchor_mm;
  double direction_deg = 0.0;  // [0, 180)
  double depth_mm = 15.0;
  double radius_mm = 3.0;

  Vec2 direction() const;
  void validate(const EnvBounds& bounds) const;
};

struct EnvDerived {
  double d_max_mm = 0.0;
  std::int64_t D_max_px = 0;
};

struct ProbePose {
  double x_mm = 0.0;
  double y_mm = 0.0;
  double yaw_deg = 0.0;  // [0, 360)

  // Unit vector of the probe's lateral (image-plane) axis, which is also its +X axis.
  Vec2 lateral_axis() const;
  // Probe +Y axis, perpendicular to the image plane.
  Vec2 normal_axis() const;
  Vec2 position() const { return {x_mm, y_mm}; }
  friend bool operator==(const ProbePose&, const ProbePose&) = default;
};

enum class Action : int { kPlusX = 0, kMinusX, kPlusY, kMinusY, kPlusYaw, kMinusYaw };
inline constexpr int kNumActions = 6;
inline constexpr double kTranslationStepMm = 5.0;
inline constexpr double kRotationStepDeg = 10.0;

std::string_view action_name(Action a);
Action action_from_index(int index);

class BinaryImage {
 public:
  BinaryImage() = default;
  BinaryImage(int rows, int cols);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::int64_t area() const { return area_; }
  bool empty() const { return area_ == 0; }

  bool at(int row, int col) const { return pixels_[index(row, col)] != 0; }
  void set(int row, int col, bool value);
  std::span<const std::uint8_t> pixels() const { return pixels_; }

  // Recount from the pixel array; used to check the cached area.
  std::int64_t count_pixels() const;
  BinaryImage mirrored_horizontally() const;

  friend bool operator==(const BinaryImage&, const BinaryImage&) = default;

 private:
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(cols_) +
           static_cast<std::size_t>(col);
  }

  int rows_ = 0;
  int cols_ = 0;
  std::int64_t area_ = 0;
  std::vector<std::uint8_t> pixels_;
};

struct Environment {
  std::uint64_t seed = 0;
  EnvBounds bounds;
  VesselSpec vessel;
  EnvDerived derived;
};

EnvDerived derive(const VesselSpec& vessel, const EnvBounds& bounds);

Environment generate_environment(std::uint64_t seed, const EnvBounds& bounds,
                                 const VesselRanges& ranges);

BinaryImage render_slice(const VesselSpec& vessel, const ProbePose& pose,
                         const EnvBounds& bounds);

ProbePose apply_action(const ProbePose& pose, Action a, const EnvBounds& bounds);

// Snaps positions and yaw onto a 1e-9 grid so that inverse moves cancel exactly.
ProbePose make_pose(double x_mm, double y_mm, double yaw_deg, const EnvBounds& bounds);

inline constexpr int kMaxResetAttempts = 10000;

// Rejection-samples a uniform pose whose rendered area reaches min_area_px.
ProbePose reset_episode(const Environment& env, double min_area_px, std::mt19937_64& rng);

struct MaskNoise {
  double flip_rate = 0.0;  // salt-and-pepper probability per pixel
  bool erode = false;      // one-pixel 4-neighbour erosion before flipping
  bool enabled() const { return flip_rate > 0.0 || erode; }
};

BinaryImage apply_mask_noise(const BinaryImage& mask, const MaskNoise& noise,
                             std::mt19937_64& rng);

// A single environment instance with its own RNG stream.
class VesselEnv {
 public:
  VesselEnv(Environment env, std::uint64_t rng_seed, MaskNoise noise = {});

  const Environment& environment() const { return env_; }
  ProbePose reset(double min_area_px);
  BinaryImage observe(const ProbePose& pose);
  std::mt19937_64& rng() { return rng_; }

 private:
  Environment env_;
  MaskNoise noise_;
  std::mt19937_64 rng_;
};

// Flat `key = value` serialization of an environment.
std::string to_config_text(const Environment& env);
Environment environment_from_config_text(std::string_view text);

// Binary PGM (P5, maxval 255). Set pixels map to 255, others to 0.
std::vector<std::uint8_t> to_gray(const BinaryImage& mask);
void write_pgm(const std::string& path, int rows, int cols, std::span<const std::uint8_t> gray);
std::vector<std::uint8_t> read_pgm(const std::string& path, int& rows, int& cols);

}  // namespace vesnav::sim
