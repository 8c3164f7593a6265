// SPDX-License-Identifier: Apache-2.0
#include "vesnav/eval/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>
#include <unordered_map>

#include "vesnav/common.hpp"
#include "vesnav/reward/reward.hpp"

namespace vesnav::eval {

double signed_offset_mm(const sim::Environment& env, const sim::ProbePose& pose) {
  const Vec2 u = env.vessel.direction();
  return cross(u, pose.position() - env.vessel.anchor_mm);
}

namespace {

constexpr int kYawSlots = 36;

struct Node {
  sim::ProbePose pose;
  int yaw_slot = 0;
  int depth = 0;
  int parent = -1;
  sim::Action via = sim::Action::kPlusX;
};

int yaw_step(sim::Action a) {
  if (a == sim::Action::kPlusYaw) return 1;
  if (a == sim::Action::kMinusYaw) return kYawSlots - 1;
  return 0;
}

}  // namespace

std::vector<sim::Action> plan_alignment(const sim::Environment& env, const sim::ProbePose& start,
                                        const OraclePlanParams& params) {
  const auto line = reward::projected_centerline(env.vessel);
  std::array<double, kYawSlots> slot_error{};
  double best_error = std::numeric_limits<double>::infinity();
  for (int k = 0; k < kYawSlots; ++k) {
    slot_error[k] = geometry::orientation_error(start.yaw_deg + 10.0 * k, line);
    best_error = std::min(best_error, slot_error[k]);
  }
  auto is_goal_slot = [&](int k) { return slot_error[k] <= best_error + 1e-9; };
  auto guarded = [&](const Node& n, double offset) {
    return !is_goal_slot(n.yaw_slot) && slot_error[n.yaw_slot] < params.guard_angle_deg &&
           std::abs(offset) < params.guard_offset_mm;
  };

  std::vector<Node> nodes;
  std::unordered_map<long long, int> seen;
  std::deque<int> queue;
  auto key_of = [&](int slot, double offset) {
    return std::llround(offset / params.offset_quantum_mm) * kYawSlots + slot;
  };

  nodes.push_back({start, 0, 0, -1, sim::Action::kPlusX});
  seen[key_of(0, signed_offset_mm(env, start))] = 0;
  queue.push_back(0);
  int best = -1;
  double best_offset = std::numeric_limits<double>::infinity();

  while (!queue.empty()) {
    const int id = queue.front();
    queue.pop_front();
    const Node node = nodes[id];
    const double offset = signed_offset_mm(env, node.pose);
    if (is_goal_slot(node.yaw_slot) && std::abs(offset) < best_offset - 1e-12) {
      best = id;
      best_offset = std::abs(offset);
    }
    if (node.depth >= params.max_depth) continue;
    if (id != 0 && (guarded(node, offset) || is_goal_slot(node.yaw_slot))) continue;
    for (int a = 0; a < sim::kNumActions; ++a) {
      const auto action = sim::action_from_index(a);
      Node next{sim::apply_action(node.pose, action, env.bounds),
                (node.yaw_slot + yaw_step(action)) % kYawSlots, node.depth + 1, id, action};
      const auto key = key_of(next.yaw_slot, signed_offset_mm(env, next.pose));
      if (!seen.emplace(key, static_cast<int>(nodes.size())).second) continue;
      nodes.push_back(next);
      queue.push_back(static_cast<int>(nodes.size()) - 1);
    }
  }

  std::vector<sim::Action> plan;
  for (int id = best; id > 0; id = nodes[id].parent) plan.push_back(nodes[id].via);
  std::reverse(plan.begin(), plan.end());
  return plan;
}

void ScriptedPolicy::begin_episode(const sim::Environment& env, const sim::ProbePose& start) {
  plan_ = plan_alignment(env, start, params_);
  next_ = 0;
}

sim::Action ScriptedPolicy::act(const agent::StepContext& ctx) {
  (void)ctx;
  if (next_ < plan_.size()) return plan_[next_++];
  // Plan exhausted without a detection: step out of alignment and back in.
  const bool out = ((next_++ - plan_.size()) % 2) == 0;
  return out ? sim::Action::kPlusYaw : sim::Action::kMinusYaw;
}

geometry::Line2D centerline_from_sweep(const sim::Environment& env, int slices) {
  if (slices < 2) throw ConfigError("a centerline sweep needs at least two slices");
  const auto& b = env.bounds;
  const Vec2 u = env.vessel.direction();
  const Vec2 n{-u.y, u.x};
  const double yaw = rad_to_deg(std::atan2(n.y, n.x));
  const double pitch = b.pitch_mm();
  std::vector<Vec2> centers;
  for (int i = 0; i < slices; ++i) {
    const double t = (i - (slices - 1) / 2.0) * 4.0;
    const Vec2 p = env.vessel.anchor_mm + t * u;
    if (p.x < 0.0 || p.y < 0.0 || p.x > b.width_mm || p.y > b.height_mm) continue;
    const auto pose = sim::make_pose(p.x, p.y, yaw, b);
    const auto mask = sim::render_slice(env.vessel, pose, b);
    if (mask.empty()) continue;
    double sum_s = 0.0;
    for (int r = 0; r < mask.rows(); ++r) {
      for (int c = 0; c < mask.cols(); ++c) {
        if (mask.at(r, c)) sum_s += (c + 0.5 - b.image_cols / 2.0) * pitch;
      }
    }
    const double s = sum_s / static_cast<double>(mask.area());
    centers.push_back(pose.position() + s * pose.lateral_axis());
  }
  return geometry::fit_centerline(centers);
}

}  // namespace vesnav::eval
