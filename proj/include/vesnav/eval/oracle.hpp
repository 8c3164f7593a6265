// SPDX-License-Identifier: Apache-2.0
//
// Scripted controller with ground-truth access, used as an upper-bound
// baseline for the learned policies.
#pragma once

#include <vector>

#include "vesnav/agent/episode.hpp"
#include "vesnav/geometry/geometry.hpp"
#include "vesnav/sim/vessel_sim.hpp"

namespace vesnav::eval {

struct OraclePlanParams {
  int max_depth = 45;
  double offset_quantum_mm = 0.01;
  // Intermediate states closer than this to the centerline while nearly
  // aligned are avoided, so the recognizer cannot fire before the goal.
  double guard_offset_mm = 4.0;
  double guard_angle_deg = 10.0;
};

// Breadth-first search over (yaw, signed centerline offset) using the real
// action effects. The goal is the best-aligned reachable yaw with the smallest
// offset. Returns the action sequence; empty when the start is already the goal.
std::vector<sim::Action> plan_alignment(const sim::Environment& env, const sim::ProbePose& start,
                                        const OraclePlanParams& params = {});

// Signed perpendicular offset of the probe from the projected centerline.
double signed_offset_mm(const sim::Environment& env, const sim::ProbePose& pose);

class ScriptedPolicy : public agent::Policy {
 public:
  explicit ScriptedPolicy(OraclePlanParams params = {}) : params_(params) {}
  void begin_episode(const sim::Environment& env, const sim::ProbePose& start) override;
  sim::Action act(const agent::StepContext& ctx) override;
  const std::vector<sim::Action>& plan() const { return plan_; }

 private:
  OraclePlanParams params_;
  std::vector<sim::Action> plan_;
  std::size_t next_ = 0;
};

// Centerline recovered from images: transverse slices along a sweep, segment
// centroids mapped back to the operation surface, then a line fit.
geometry::Line2D centerline_from_sweep(const sim::Environment& env, int slices = 9);

}  // namespace vesnav::eval
