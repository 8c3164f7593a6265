// SPDX-License-Identifier: Apache-2.0
#include "vesnav/reward/reward.hpp"

#include <algorithm>
#include <cmath>

namespace vesnav::reward {

void RewardConfig::validate() const {
  if (mu_dis < 0 || mu_ves < 0 || std::abs(mu_dis + mu_ves - 1.0) > 1e-12) {
    throw ConfigError("reward: mu_dis + mu_ves must equal 1");
  }
  if (!(0 < near_goal && near_goal < goal && goal < 1)) {
    throw ConfigError("reward: need 0 < near_goal < goal < 1");
  }
  if (!(D_th_px_at_256 >= 0)) throw ConfigError("reward: D_th must be non-negative");
}

double score_distance(const sim::ProbePose& pose, const geometry::Line2D& line, double d_max_mm) {
  const double d = geometry::distance_to_line(pose.position(), line);
  return std::clamp(1.0 - d / d_max_mm, 0.0, 1.0);
}

double score_vessel(std::int64_t D_t, std::int64_t D_max) {
  return std::clamp(static_cast<double>(D_t) / static_cast<double>(D_max), 0.0, 1.0);
}

StepScore combine(double nu_dis, double nu_ves, const RewardConfig& cfg) {
  return {nu_dis, nu_ves, cfg.mu_dis * nu_dis + cfg.mu_ves * nu_ves};
}

RewardCase classify(const StepScore& score, std::int64_t D_t, double D_th_px,
                    const RewardConfig& cfg) {
  if (static_cast<double>(D_t) < D_th_px) return RewardCase::kNoVessel;
  if (score.nu > cfg.goal) return RewardCase::kGoal;
  if (score.nu > cfg.near_goal) return RewardCase::kNearGoal;
  return RewardCase::kDelta;
}

double step_reward(const StepScore& score, const StepScore& prev, std::int64_t D_t,
                   double D_th_px, const RewardConfig& cfg) {
  switch (classify(score, D_t, D_th_px, cfg)) {
    case RewardCase::kNoVessel: return cfg.no_vessel_penalty;
    case RewardCase::kGoal: return cfg.goal_reward;
    case RewardCase::kNearGoal: return cfg.near_reward;
    case RewardCase::kDelta: return score.nu - prev.nu;
  }
  return 0.0;
}

geometry::Line2D projected_centerline(const sim::VesselSpec& vessel) {
  return {vessel.anchor_mm, vessel.direction()};
}

StepScore score_state(const sim::Environment& env, const sim::ProbePose& pose,
                      std::int64_t D_t, const RewardConfig& cfg) {
  return combine(score_distance(pose, projected_centerline(env.vessel), env.derived.d_max_mm),
                 score_vessel(D_t, env.derived.D_max_px), cfg);
}

}  // namespace vesnav::reward
