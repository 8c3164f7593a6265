// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "vesnav/agent/episode.hpp"
#include "vesnav/agent/trainer.hpp"
#include "vesnav/geometry/geometry.hpp"
#include "vesnav/reward/reward.hpp"
#include "vesnav/sim/vessel_sim.hpp"

namespace vesnav::eval {

struct EvalConfig {
  int n_envs = 20;
  int episodes = 100;
  int max_steps = 50;
  std::uint64_t seed = 2024;
  double flip_rate = 0.0;
  bool erode = false;

  sim::MaskNoise noise() const { return {flip_rate, erode}; }
  void validate() const;
};

// Everything a run needs, loaded from one `[section]` / `key = value` file.
// Sections: env, reward, termination, model, train, eval.
struct ExperimentConfig {
  sim::EnvBounds bounds;
  sim::VesselRanges ranges;
  std::uint64_t train_seed_base = 1000;
  std::uint64_t heldout_seed_base = 900000;
  sim::MaskNoise train_noise;
  reward::RewardConfig reward;
  geometry::TerminationParams termination;
  agent::ModelConfig model;
  agent::TrainConfig train;
  EvalConfig eval;

  // Throws ConfigError on any invalid field or overlapping seed ranges.
  void validate() const;

  std::vector<sim::Environment> training_environments() const;
  std::vector<sim::Environment> heldout_environments() const;
  agent::EpisodeSettings episode_settings() const;
};

ExperimentConfig parse_experiment(std::string_view text);
ExperimentConfig load_experiment(const std::string& path);
std::string to_config_text(const ExperimentConfig& cfg);

// Parses "0:5e-4, 500:3e-4" into schedule stages.
std::vector<agent::LrStage> parse_lr_schedule(std::string_view text);
std::string format_lr_schedule(const std::vector<agent::LrStage>& stages);

struct AblationVariant {
  std::string name;
  ExperimentConfig config;
};

inline constexpr std::string_view kFullModel = "full";

// Full model, no_lstm, no_area_changes, no_history, buffer_8.
std::vector<AblationVariant> ablation_grid(const ExperimentConfig& base);
ExperimentConfig apply_ablation(const ExperimentConfig& base, std::string_view name);

}  // namespace vesnav::eval
