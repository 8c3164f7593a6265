// SPDX-License-Identifier: Apache-2.0
//
// Single-worker A2C training loop. One RNG stream drives environment choice,
// episode resets and action sampling, so a fixed seed fixes the whole run.
#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "vesnav/agent/a2c.hpp"
#include "vesnav/geometry/geometry.hpp"
#include "vesnav/nn/actor_critic.hpp"
#include "vesnav/nn/optim.hpp"
#include "vesnav/reward/reward.hpp"
#include "vesnav/sim/vessel_sim.hpp"
#include "vesnav/state/state_rep.hpp"

namespace vesnav::agent {

struct LrStage {
  int first_episode = 0;
  double lr = 0.0;
};

struct TrainConfig {
  int episodes = 3000;
  int max_steps = 500;
  int update_every = 20;
  double gamma = 0.99;
  std::vector<LrStage> lr_schedule{{0, 5e-4}, {500, 3e-4}, {1500, 1e-4}};
  double entropy_coef = 0.01;
  double critic_coef = 0.5;
  int n_envs = 10;
  std::uint64_t seed = 1;
  bool normalize_advantages = false;
  double max_grad_norm = 0.0;  // 0 disables clipping
  int checkpoint_every = 100;

  void validate() const;
  double lr_at(int episode) const;
};

// Network shape plus state-representation switches; the ablation variants
// differ from the full model only here.
struct ModelConfig {
  nn::NetConfig net;
  state::StateFlags flags;
};

struct EpisodeLog {
  int episode = 0;
  int env_id = 0;
  int steps = 0;
  double ret = 0.0;
  bool success = false;
  double loss_actor = 0.0;   // per-step mean over the episode
  double loss_critic = 0.0;  // per-step mean of (R - V)^2
  double entropy = 0.0;      // per-step mean policy entropy
  double lr = 0.0;
};

// One JSON object per line, keys in a fixed order.
std::string to_json_line(const EpisodeLog& log);
EpisodeLog episode_log_from_json(const std::string& line);

class Trainer {
 public:
  Trainer(TrainConfig config, ModelConfig model, std::vector<sim::Environment> envs,
          reward::RewardConfig reward = {}, geometry::TerminationParams termination = {},
          sim::MaskNoise noise = {});

  // Trains a single episode and advances the episode counter.
  EpisodeLog train_episode();
  // Trains until config.episodes, writing one log line per episode to `log`
  // and checkpoints to `checkpoint_path` (when non-empty).
  void train(std::ostream* log, const std::string& checkpoint_path = {});

  int episode() const { return episode_; }
  const TrainConfig& config() const { return config_; }
  const ModelConfig& model() const { return model_; }
  nn::ActorCritic& net() { return net_; }
  const nn::ActorCritic& net() const { return net_; }
  const nn::Adam& optimizer() const { return adam_; }
  const std::vector<sim::Environment>& environments() const { return envs_; }

  std::string rng_state() const;
  void set_rng_state(const std::string& text);

  // Weights, optimizer moments, counters and RNG stream.
  void save_checkpoint(const std::string& path) const;
  void load_checkpoint(const std::string& path);

 private:
  TrainConfig config_;
  ModelConfig model_;
  std::vector<sim::Environment> envs_;
  reward::RewardConfig reward_;
  geometry::TerminationParams termination_;
  sim::MaskNoise noise_;
  nn::ActorCritic net_;
  nn::Adam adam_;
  std::mt19937_64 rng_;
  int episode_ = 0;
};

// Network-only checkpoint I/O. The model shape travels with the weights so a
// checkpoint can be evaluated without its training config.
void save_model(const std::string& path, const nn::ActorCritic& net, const ModelConfig& model);
struct LoadedModel {
  ModelConfig model;
  nn::ActorCritic net;
};
LoadedModel load_model(const std::string& path);

}  // namespace vesnav::agent
