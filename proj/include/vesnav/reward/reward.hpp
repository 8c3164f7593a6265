// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include "vesnav/geometry/geometry.hpp"
#include "vesnav/sim/vessel_sim.hpp"

namespace vesnav::reward {

struct RewardConfig {
  double mu_dis = 0.2;
  double mu_ves = 0.8;
  double D_th_px_at_256 = 50.0;  // vessel-existence threshold at 256x256
  double near_goal = 0.9;
  double goal = 0.95;
  double no_vessel_penalty = -0.2;
  double near_reward = 1.0;
  double goal_reward = 5.0;

  // Threshold scaled by pixel-count ratio to the 256x256 reference frame.
  double vessel_threshold_px(const sim::EnvBounds& bounds) const {
    return D_th_px_at_256 * bounds.pixel_count() / (256.0 * 256.0);
  }
  void validate() const;
};

struct StepScore {
  double nu_dis = 0.0;
  double nu_ves = 0.0;
  double nu = 0.0;
};

double score_distance(const sim::ProbePose& pose, const geometry::Line2D& line, double d_max_mm);
double score_vessel(std::int64_t D_t, std::int64_t D_max);
StepScore combine(double nu_dis, double nu_ves, const RewardConfig& cfg);

enum class RewardCase { kNoVessel, kGoal, kNearGoal, kDelta };

RewardCase classify(const StepScore& score, std::int64_t D_t, double D_th_px,
                    const RewardConfig& cfg);

// Cases in order: no vessel, goal, near goal, score delta.
double step_reward(const StepScore& score, const StepScore& prev, std::int64_t D_t,
                   double D_th_px, const RewardConfig& cfg);

// Ground-truth centerline projected on the operation surface.
geometry::Line2D projected_centerline(const sim::VesselSpec& vessel);

StepScore score_state(const sim::Environment& env, const sim::ProbePose& pose,
                      std::int64_t D_t, const RewardConfig& cfg);

}  // namespace vesnav::reward
