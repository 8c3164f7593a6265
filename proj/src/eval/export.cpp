// SPDX-License-Identifier: Apache-2.0
#include "vesnav/eval/export.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "vesnav/common.hpp"
#include "vesnav/config/config.hpp"
#include "vesnav/geometry/geometry.hpp"

namespace vesnav::eval {
namespace {

constexpr const char* kHeader =
    "step,x_mm,y_mm,yaw_deg,action,area_px,nu_dis,nu_ves,nu,reward,R_ter,H_t,W_t,d_v";

std::string opt(const std::optional<double>& v) {
  return v ? config::format_double(*v) : std::string();
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double to_double(const std::string& s) {
  return config::parse_double(config::Entry{"csv", s, 0});
}

std::optional<double> to_opt(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return to_double(s);
}

}  // namespace

std::string trajectory_csv(const agent::EpisodeRecord& record) {
  using config::format_double;
  std::ostringstream out;
  out << kHeader << '\n';
  for (const auto& row : record.rows) {
    out << row.step << ',' << format_double(row.pose.x_mm) << ','
        << format_double(row.pose.y_mm) << ',' << format_double(row.pose.yaw_deg) << ','
        << (row.action ? std::string(sim::action_name(*row.action)) : std::string()) << ','
        << row.area_px << ',' << format_double(row.score.nu_dis) << ','
        << format_double(row.score.nu_ves) << ',' << format_double(row.score.nu) << ','
        << format_double(row.reward) << ',' << opt(row.ratio) << ',' << opt(row.H_px) << ','
        << opt(row.W_px) << ',' << format_double(row.d_v_px) << '\n';
  }
  return out.str();
}

std::vector<std::uint8_t> frame_with_overlay(const sim::BinaryImage& mask,
                                             const std::optional<geometry::OrientedRect>& rect) {
  auto gray = sim::to_gray(mask);
  if (!rect) return gray;
  const auto corners = rect->corners();
  for (int e = 0; e < 4; ++e) {
    const Vec2 a = corners[e];
    const Vec2 b = corners[(e + 1) % 4];
    const int samples = std::max(1, static_cast<int>(std::ceil(norm(b - a) * 4.0)));
    for (int i = 0; i <= samples; ++i) {
      const Vec2 p = a + (static_cast<double>(i) / samples) * (b - a);
      const int c = static_cast<int>(std::floor(p.x));
      const int r = static_cast<int>(std::floor(p.y));
      if (r < 0 || c < 0 || r >= mask.rows() || c >= mask.cols()) continue;
      auto& px = gray[static_cast<std::size_t>(r) * mask.cols() + c];
      if (px == 0) px = kOverlayGray;
    }
  }
  return gray;
}

sim::BinaryImage mask_from_gray(const std::vector<std::uint8_t>& gray, int rows, int cols) {
  if (gray.size() != static_cast<std::size_t>(rows) * cols) {
    throw DimensionError("gray frame size does not match its dimensions");
  }
  sim::BinaryImage mask(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (gray[static_cast<std::size_t>(r) * cols + c] == 255) mask.set(r, c, true);
    }
  }
  return mask;
}

void export_trajectory(const agent::EpisodeRecord& record, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
  const auto csv_path = (std::filesystem::path(dir) / "trajectory.csv").string();
  std::ofstream out(csv_path, std::ios::binary);
  if (!out) throw IoError("cannot write " + csv_path);
  out << trajectory_csv(record);
  if (!out) throw IoError("write failed for " + csv_path);

  for (std::size_t i = 0; i < record.frames.size(); ++i) {
    const auto& mask = record.frames[i];
    std::optional<geometry::OrientedRect> rect;
    if (!mask.empty()) rect = geometry::min_area_rect(geometry::convex_hull(mask));
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%04zu.pgm", i);
    sim::write_pgm((std::filesystem::path(dir) / name).string(), mask.rows(), mask.cols(),
                   frame_with_overlay(mask, rect));
  }
}

std::vector<CsvRow> read_trajectory_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  std::string line;
  if (!std::getline(in, line) || line != kHeader) throw IoError("unexpected CSV header in " + path);
  std::vector<CsvRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != 14) throw IoError("malformed CSV row in " + path);
    CsvRow r;
    r.step = std::stoi(cells[0]);
    r.x_mm = to_double(cells[1]);
    r.y_mm = to_double(cells[2]);
    r.yaw_deg = to_double(cells[3]);
    r.action = cells[4];
    r.area_px = std::stoll(cells[5]);
    r.nu_dis = to_double(cells[6]);
    r.nu_ves = to_double(cells[7]);
    r.nu = to_double(cells[8]);
    r.reward = to_double(cells[9]);
    r.R_ter = to_opt(cells[10]);
    r.H_t = to_opt(cells[11]);
    r.W_t = to_opt(cells[12]);
    r.d_v = to_double(cells[13]);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace vesnav::eval
