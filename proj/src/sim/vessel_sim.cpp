// SPDX-License-Identifier: Apache-2.0
#include "vesnav/sim/vessel_sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "vesnav/config/config.hpp"

namespace vesnav::sim {
namespace {

double snap(double v) { return std::round(v * 1e9) / 1e9; }

// Unit vector at `deg`, with the 180-degree partner negated bit-exactly.
Vec2 unit_from_deg(double deg) {
  const double w = wrap_angle(deg);
  const bool flip = w >= 180.0;
  const double base = flip ? w - 180.0 : w;
  const double rad = deg_to_rad(base);
  Vec2 u{std::cos(rad), std::sin(rad)};
  if (flip) u = {-u.x, -u.y};
  return u;
}

}  // namespace

void EnvBounds::validate() const {
  if (!(width_mm > 0 && height_mm > 0 && image_depth_mm > 0 && image_width_mm > 0)) {
    throw ConfigError("bounds: all lengths must be strictly positive");
  }
  if (image_rows < 8 || image_cols < 8) {
    throw ConfigError("bounds: image must be at least 8x8 pixels");
  }
  const double lateral = image_width_mm / image_cols;
  const double vertical = image_depth_mm / image_rows;
  if (std::abs(lateral - vertical) > 1e-12 * std::max(lateral, vertical)) {
    throw ConfigError("bounds: pixels must be square (image_width/cols == image_depth/rows)");
  }
}

Vec2 VesselSpec::direction() const { return unit_from_deg(direction_deg); }

void VesselSpec::validate(const EnvBounds& bounds) const {
  if (!(radius_mm > 0)) throw ConfigError("vessel: radius must be positive");
  if (!(depth_mm - radius_mm > 0)) throw ConfigError("vessel: must lie entirely below the surface");
  if (!(depth_mm + radius_mm < bounds.image_depth_mm)) {
    throw ConfigError("vessel: must lie inside the imaging depth");
  }
  if (!(direction_deg >= 0.0 && direction_deg < 180.0)) {
    throw ConfigError("vessel: direction must be in [0, 180)");
  }
}

Vec2 ProbePose::lateral_axis() const { return unit_from_deg(yaw_deg); }
Vec2 ProbePose::normal_axis() const { return unit_from_deg(yaw_deg + 90.0); }

std::string_view action_name(Action a) {
  switch (a) {
    case Action::kPlusX: return "+X";
    case Action::kMinusX: return "-X";
    case Action::kPlusY: return "+Y";
    case Action::kMinusY: return "-Y";
    case Action::kPlusYaw: return "+YAW";
    case Action::kMinusYaw: return "-YAW";
  }
  return "?";
}

Action action_from_index(int index) {
  if (index < 0 || index >= kNumActions) throw DimensionError("action index out of range");
  return static_cast<Action>(index);
}

BinaryImage::BinaryImage(int rows, int cols)
    : rows_(rows), cols_(cols), pixels_(static_cast<std::size_t>(rows) * cols, 0) {}

void BinaryImage::set(int row, int col, bool value) {
  auto& p = pixels_[index(row, col)];
  if ((p != 0) == value) return;
  p = value ? 1 : 0;
  area_ += value ? 1 : -1;
}

std::int64_t BinaryImage::count_pixels() const {
  return std::count_if(pixels_.begin(), pixels_.end(), [](std::uint8_t v) { return v != 0; });
}

BinaryImage BinaryImage::mirrored_horizontally() const {
  BinaryImage out(rows_, cols_);
  for (int r = 0; r < rows_; ++r) {
    for (int c = 0; c < cols_; ++c) out.set(r, cols_ - 1 - c, at(r, c));
  }
  return out;
}

EnvDerived derive(const VesselSpec& vessel, const EnvBounds& bounds) {
  EnvDerived d;
  const Vec2 dir = vessel.direction();
  const std::array<Vec2, 4> corners{Vec2{0, 0}, Vec2{bounds.width_mm, 0},
                                    Vec2{0, bounds.height_mm},
                                    Vec2{bounds.width_mm, bounds.height_mm}};
  for (const auto& c : corners) {
    d.d_max_mm = std::max(d.d_max_mm, std::abs(cross(dir, c - vessel.anchor_mm)));
  }
  // Rows of the exact longitudinal slice; no column of any slice can hold more.
  const double pitch = bounds.pitch_mm();
  const double r2 = vessel.radius_mm * vessel.radius_mm;
  std::int64_t rows = 0;
  for (int i = 0; i < bounds.image_rows; ++i) {
    const double dz = (i + 0.5) * pitch - vessel.depth_mm;
    if (dz * dz <= r2) ++rows;
  }
  d.D_max_px = rows * bounds.image_cols;
  return d;
}

Environment generate_environment(std::uint64_t seed, const EnvBounds& bounds,
                                 const VesselRanges& ranges) {
  bounds.validate();
  if (!(ranges.radius_min_mm > 0 && ranges.radius_min_mm <= ranges.radius_max_mm &&
        ranges.depth_min_mm <= ranges.depth_max_mm && ranges.anchor_fraction > 0 &&
        ranges.anchor_fraction <= 1)) {
    throw ConfigError("vessel ranges are malformed");
  }
  if (!(ranges.depth_min_mm - ranges.radius_max_mm > 0) ||
      !(ranges.depth_max_mm + ranges.radius_max_mm < bounds.image_depth_mm)) {
    throw ConfigError("vessel ranges cannot keep the vessel between surface and imaging depth");
  }
  std::mt19937_64 rng(seed);
  Environment env;
  env.seed = seed;
  env.bounds = bounds;
  env.vessel.radius_mm = uniform(rng, ranges.radius_min_mm, ranges.radius_max_mm);
  env.vessel.depth_mm = uniform(rng, ranges.depth_min_mm, ranges.depth_max_mm);
  env.vessel.direction_deg = uniform(rng, 0.0, 180.0);
  const double margin = 0.5 * (1.0 - ranges.anchor_fraction);
  env.vessel.anchor_mm = {
      uniform(rng, margin * bounds.width_mm, (1.0 - margin) * bounds.width_mm),
      uniform(rng, margin * bounds.height_mm, (1.0 - margin) * bounds.height_mm)};
  env.vessel.validate(bounds);
  env.derived = derive(env.vessel, bounds);
  return env;
}

BinaryImage render_slice(const VesselSpec& vessel, const ProbePose& pose,
                         const EnvBounds& bounds) {
  const int rows = bounds.image_rows;
  const int cols = bounds.image_cols;
  const double pitch = bounds.pitch_mm();
  const Vec2 dir = vessel.direction();
  const Vec2 lateral = pose.lateral_axis();
  // Horizontal distance from the axis is linear in the lateral offset; the
  // vertical part depends on the row only. Their squares add to the 3D distance.
  const double e0 = cross(dir, pose.position() - vessel.anchor_mm);
  const double slope = cross(dir, lateral);
  std::vector<double> e2(cols);
  for (int c = 0; c < cols; ++c) {
    const double s = (c + 0.5 - 0.5 * cols) * pitch;
    const double e = e0 + s * slope;
    e2[c] = e * e;
  }
  const double r2 = vessel.radius_mm * vessel.radius_mm;
  BinaryImage mask(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const double dz = (r + 0.5) * pitch - vessel.depth_mm;
    const double dz2 = dz * dz;
    if (dz2 > r2) continue;
    for (int c = 0; c < cols; ++c) {
      if (e2[c] + dz2 <= r2) mask.set(r, c, true);
    }
  }
  return mask;
}

ProbePose make_pose(double x_mm, double y_mm, double yaw_deg, const EnvBounds& bounds) {
  ProbePose p;
  p.x_mm = snap(std::clamp(x_mm, 0.0, bounds.width_mm));
  p.y_mm = snap(std::clamp(y_mm, 0.0, bounds.height_mm));
  p.yaw_deg = wrap_angle(snap(wrap_angle(yaw_deg)));
  return p;
}

ProbePose apply_action(const ProbePose& pose, Action a, const EnvBounds& bounds) {
  Vec2 pos = pose.position();
  double yaw = pose.yaw_deg;
  switch (a) {
    case Action::kPlusX: pos = pos + kTranslationStepMm * pose.lateral_axis(); break;
    case Action::kMinusX: pos = pos - kTranslationStepMm * pose.lateral_axis(); break;
    case Action::kPlusY: pos = pos + kTranslationStepMm * pose.normal_axis(); break;
    case Action::kMinusY: pos = pos - kTranslationStepMm * pose.normal_axis(); break;
    case Action::kPlusYaw: yaw += kRotationStepDeg; break;
    case Action::kMinusYaw: yaw -= kRotationStepDeg; break;
  }
  return make_pose(pos.x, pos.y, yaw, bounds);
}

ProbePose reset_episode(const Environment& env, double min_area_px, std::mt19937_64& rng) {
  for (int attempt = 0; attempt < kMaxResetAttempts; ++attempt) {
    const double x = uniform(rng, 0.0, env.bounds.width_mm);
    const double y = uniform(rng, 0.0, env.bounds.height_mm);
    const double yaw = uniform(rng, 0.0, 360.0);
    const ProbePose pose = make_pose(x, y, yaw, env.bounds);
    if (static_cast<double>(render_slice(env.vessel, pose, env.bounds).area()) >= min_area_px) {
      return pose;
    }
  }
  throw EnvironmentError("vessel not observable from any of " +
                         std::to_string(kMaxResetAttempts) + " sampled poses (env seed " +
                         std::to_string(env.seed) + ")");
}

BinaryImage apply_mask_noise(const BinaryImage& mask, const MaskNoise& noise,
                             std::mt19937_64& rng) {
  BinaryImage out = mask;
  const int rows = mask.rows();
  const int cols = mask.cols();
  if (noise.erode) {
    // Frame edges count as set so bands touching the border keep their width.
    auto set_or_outside = [&](int r, int c) {
      return r < 0 || c < 0 || r >= rows || c >= cols || mask.at(r, c);
    };
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        if (!mask.at(r, c)) continue;
        const bool interior = set_or_outside(r - 1, c) && set_or_outside(r + 1, c) &&
                              set_or_outside(r, c - 1) && set_or_outside(r, c + 1);
        if (!interior) out.set(r, c, false);
      }
    }
  }
  if (noise.flip_rate > 0.0) {
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        if (uniform01(rng) < noise.flip_rate) out.set(r, c, !out.at(r, c));
      }
    }
  }
  return out;
}

VesselEnv::VesselEnv(Environment env, std::uint64_t rng_seed, MaskNoise noise)
    : env_(std::move(env)), noise_(noise), rng_(rng_seed) {}

ProbePose VesselEnv::reset(double min_area_px) { return reset_episode(env_, min_area_px, rng_); }

BinaryImage VesselEnv::observe(const ProbePose& pose) {
  BinaryImage mask = render_slice(env_.vessel, pose, env_.bounds);
  if (noise_.enabled()) mask = apply_mask_noise(mask, noise_, rng_);
  return mask;
}

std::string to_config_text(const Environment& env) {
  using config::format_double;
  std::ostringstream out;
  out << "seed = " << env.seed << '\n'
      << "radius_mm = " << format_double(env.vessel.radius_mm) << '\n'
      << "depth_mm = " << format_double(env.vessel.depth_mm) << '\n'
      << "direction_deg = " << format_double(env.vessel.direction_deg) << '\n'
      << "anchor_x_mm = " << format_double(env.vessel.anchor_mm.x) << '\n'
      << "anchor_y_mm = " << format_double(env.vessel.anchor_mm.y) << '\n'
      << "bounds.width_mm = " << format_double(env.bounds.width_mm) << '\n'
      << "bounds.height_mm = " << format_double(env.bounds.height_mm) << '\n'
      << "bounds.image_depth_mm = " << format_double(env.bounds.image_depth_mm) << '\n'
      << "bounds.image_width_mm = " << format_double(env.bounds.image_width_mm) << '\n'
      << "bounds.image_rows = " << env.bounds.image_rows << '\n'
      << "bounds.image_cols = " << env.bounds.image_cols << '\n';
  return out.str();
}

Environment environment_from_config_text(std::string_view text) {
  const auto file = config::KeyValueFile::parse(text);
  Environment env;
  for (const auto& e : file.section("")) {
    if (e.key == "seed") env.seed = static_cast<std::uint64_t>(config::parse_int(e));
    else if (e.key == "radius_mm") env.vessel.radius_mm = config::parse_double(e);
    else if (e.key == "depth_mm") env.vessel.depth_mm = config::parse_double(e);
    else if (e.key == "direction_deg") env.vessel.direction_deg = config::parse_double(e);
    else if (e.key == "anchor_x_mm") env.vessel.anchor_mm.x = config::parse_double(e);
    else if (e.key == "anchor_y_mm") env.vessel.anchor_mm.y = config::parse_double(e);
    else if (e.key == "bounds.width_mm") env.bounds.width_mm = config::parse_double(e);
    else if (e.key == "bounds.height_mm") env.bounds.height_mm = config::parse_double(e);
    else if (e.key == "bounds.image_depth_mm") env.bounds.image_depth_mm = config::parse_double(e);
    else if (e.key == "bounds.image_width_mm") env.bounds.image_width_mm = config::parse_double(e);
    else if (e.key == "bounds.image_rows") env.bounds.image_rows = static_cast<int>(config::parse_int(e));
    else if (e.key == "bounds.image_cols") env.bounds.image_cols = static_cast<int>(config::parse_int(e));
    else config::unknown_key("", e);
  }
  env.bounds.validate();
  env.vessel.validate(env.bounds);
  env.derived = derive(env.vessel, env.bounds);
  return env;
}

std::vector<std::uint8_t> to_gray(const BinaryImage& mask) {
  std::vector<std::uint8_t> gray(mask.pixels().size());
  std::transform(mask.pixels().begin(), mask.pixels().end(), gray.begin(),
                 [](std::uint8_t v) { return v ? std::uint8_t{255} : std::uint8_t{0}; });
  return gray;
}

void write_pgm(const std::string& path, int rows, int cols, std::span<const std::uint8_t> gray) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "P5\n" << cols << ' ' << rows << "\n255\n";
  out.write(reinterpret_cast<const char*>(gray.data()), static_cast<std::streamsize>(gray.size()));
  if (!out) throw IoError("write failed: " + path);
}

std::vector<std::uint8_t> read_pgm(const std::string& path, int& rows, int& cols) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::string magic;
  int maxval = 0;
  in >> magic >> cols >> rows >> maxval;
  if (magic != "P5" || maxval != 255 || rows <= 0 || cols <= 0) {
    throw IoError("not an 8-bit binary PGM: " + path);
  }
  in.get();
  std::vector<std::uint8_t> gray(static_cast<std::size_t>(rows) * cols);
  in.read(reinterpret_cast<char*>(gray.data()), static_cast<std::streamsize>(gray.size()));
  if (!in) throw IoError("truncated PGM: " + path);
  return gray;
}

}  // namespace vesnav::sim
