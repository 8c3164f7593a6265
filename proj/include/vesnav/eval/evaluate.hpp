// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "vesnav/agent/episode.hpp"
#include "vesnav/sim/vessel_sim.hpp"

namespace vesnav::eval {

struct MetricsSummary {
  double success_rate = 0.0;
  double mean_steps = 0.0;  // successful episodes only
  double position_error_mean_mm = 0.0;
  double position_error_std_mm = 0.0;
  double orientation_error_mean_deg = 0.0;
  double orientation_error_std_deg = 0.0;
  int n_samples = 0;
  int n_success = 0;

  friend bool operator==(const MetricsSummary&, const MetricsSummary&) = default;
};

// Pure fold over the records. Standard deviations use the n - 1 denominator.
MetricsSummary summarize(const std::vector<agent::EpisodeRecord>& records);

struct EvaluationResult {
  MetricsSummary summary;
  std::vector<agent::EpisodeRecord> records;
};

// Episode i runs on environment i mod envs.size(). Its start pose and noise
// come from a stream seeded by (seed, i), so results do not depend on how many
// random numbers earlier episodes consumed.
EvaluationResult evaluate(agent::Policy& policy, const std::vector<sim::Environment>& envs,
                          int n_episodes, const agent::EpisodeSettings& settings,
                          std::uint64_t seed);

std::mt19937_64 episode_stream(std::uint64_t seed, int episode);

}  // namespace vesnav::eval
