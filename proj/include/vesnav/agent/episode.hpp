// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <vector>

#include "vesnav/agent/a2c.hpp"
#include "vesnav/geometry/geometry.hpp"
#include "vesnav/nn/actor_critic.hpp"
#include "vesnav/reward/reward.hpp"
#include "vesnav/sim/vessel_sim.hpp"
#include "vesnav/state/state_rep.hpp"

namespace vesnav::agent {

// What a policy may look at. Learned and random policies use only the
// buffers; the scripted oracle also reads the ground-truth environment and pose.
struct StepContext {
  const sim::Environment& env;
  const sim::ProbePose& pose;
  const state::RollingBuffers& buffers;
  std::mt19937_64& rng;
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual void begin_episode(const sim::Environment& env, const sim::ProbePose& start) {
    (void)env;
    (void)start;
  }
  virtual sim::Action act(const StepContext& ctx) = 0;
  // Number of frames the policy wants in its rolling buffer.
  virtual int buffer_size() const { return 1; }
};

class RandomPolicy : public Policy {
 public:
  sim::Action act(const StepContext& ctx) override;
};

// Recurrent network policy; LSTM state resets at every episode start.
class NetworkPolicy : public Policy {
 public:
  NetworkPolicy(const nn::ActorCritic& net, SelectMode mode, state::StateFlags flags = {});
  void begin_episode(const sim::Environment& env, const sim::ProbePose& start) override;
  sim::Action act(const StepContext& ctx) override;
  int buffer_size() const override { return net_.config().buffer_size; }

 private:
  const nn::ActorCritic& net_;
  SelectMode mode_;
  state::StateFlags flags_;
  state::FeatureMemo memo_;
  nn::LSTMState lstm_;
};

struct StepRow {
  int step = 0;
  sim::ProbePose pose;
  std::optional<sim::Action> action;  // empty on the initial row
  std::int64_t area_px = 0;
  reward::StepScore score;
  double reward = 0.0;
  std::optional<double> ratio;  // R_ter, empty when no rectangle
  std::optional<double> H_px;
  std::optional<double> W_px;
  double d_v_px = 0.0;
  bool terminated = false;
};

struct EpisodeRecord {
  int env_id = 0;
  std::uint64_t seed = 0;
  bool success = false;
  int steps = 0;
  std::optional<double> position_error_mm;     // set only on success
  std::optional<double> orientation_error_deg; // set only on success
  sim::ProbePose final_pose;
  std::vector<StepRow> rows;              // steps + 1 rows, including the initial state
  std::vector<sim::BinaryImage> frames;   // one per row when kept
};

struct EpisodeSettings {
  int max_steps = 50;
  reward::RewardConfig reward;
  geometry::TerminationParams termination;
  sim::MaskNoise noise;
  bool keep_frames = false;
};

// Runs until the recognizer fires or the step cap is hit. Errors are measured
// against `centerline` at the terminating pose.
EpisodeRecord run_episode(Policy& policy, const sim::Environment& env, int env_id,
                          const sim::ProbePose& start, const geometry::Line2D& centerline,
                          const EpisodeSettings& settings, std::mt19937_64& rng);

}  // namespace vesnav::agent
