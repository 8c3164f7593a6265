// SPDX-License-Identifier: Apache-2.0
#include "vesnav/eval/evaluate.hpp"

#include <cmath>

#include "vesnav/common.hpp"
#include "vesnav/reward/reward.hpp"

namespace vesnav::eval {
namespace {

void mean_std(const std::vector<double>& xs, double& mean, double& sd) {
  mean = 0.0;
  sd = 0.0;
  if (xs.empty()) return;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

}  // namespace

MetricsSummary summarize(const std::vector<agent::EpisodeRecord>& records) {
  MetricsSummary s;
  s.n_samples = static_cast<int>(records.size());
  std::vector<double> pos;
  std::vector<double> ori;
  double steps = 0.0;
  for (const auto& r : records) {
    if (!r.success) continue;
    ++s.n_success;
    steps += r.steps;
    if (r.position_error_mm) pos.push_back(*r.position_error_mm);
    if (r.orientation_error_deg) ori.push_back(*r.orientation_error_deg);
  }
  if (s.n_samples > 0) s.success_rate = static_cast<double>(s.n_success) / s.n_samples;
  if (s.n_success > 0) s.mean_steps = steps / s.n_success;
  mean_std(pos, s.position_error_mean_mm, s.position_error_std_mm);
  mean_std(ori, s.orientation_error_mean_deg, s.orientation_error_std_deg);
  return s;
}

std::mt19937_64 episode_stream(std::uint64_t seed, int episode) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(episode)};
  return std::mt19937_64(seq);
}

EvaluationResult evaluate(agent::Policy& policy, const std::vector<sim::Environment>& envs,
                          int n_episodes, const agent::EpisodeSettings& settings,
                          std::uint64_t seed) {
  if (envs.empty()) throw ConfigError("evaluation needs at least one environment");
  EvaluationResult result;
  result.records.reserve(n_episodes);
  for (int i = 0; i < n_episodes; ++i) {
    const int env_id = i % static_cast<int>(envs.size());
    const auto& env = envs[env_id];
    auto rng = episode_stream(seed, i);
    const auto start =
        sim::reset_episode(env, settings.reward.vessel_threshold_px(env.bounds), rng);
    result.records.push_back(agent::run_episode(policy, env, env_id, start,
                                                reward::projected_centerline(env.vessel),
                                                settings, rng));
  }
  result.summary = summarize(result.records);
  return result;
}

}  // namespace vesnav::eval
