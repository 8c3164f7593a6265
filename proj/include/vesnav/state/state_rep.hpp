// SPDX-License-Identifier: Apache-2.0
//
// Multi-modality observation: [image features | action one-hots | area deltas],
// each block holding one entry per buffer slot, oldest slot first.
#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "vesnav/nn/actor_critic.hpp"
#include "vesnav/sim/vessel_sim.hpp"

namespace vesnav::state {

struct StateFlags {
  bool zero_area_deltas = false;
};

struct Observation {
  std::vector<double> values;
  std::vector<std::int64_t> image_ids;  // one per slot, kPaddingImage for empty slots
};

class RollingBuffers {
 public:
  struct Frame {
    std::int64_t id = 0;
    std::vector<double> image;     // row-major 0/1
    std::optional<sim::Action> action;  // action that produced this frame
    double delta = 0.0;            // (area_t - area_{t-1}) / (H*W), 0 for the first frame
  };

  RollingBuffers(int capacity, int rows, int cols);

  // Starts an episode with the initial frame (no action, zero delta).
  void reset(const sim::BinaryImage& initial);
  // FIFO update with the frame produced by `action`.
  void push_step(const sim::BinaryImage& mask, sim::Action action);

  int capacity() const { return capacity_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  const std::deque<Frame>& frames() const { return frames_; }
  // Last capacity+1 pixel counts, oldest first.
  const std::deque<std::int64_t>& areas() const { return areas_; }
  std::int64_t next_id() const { return next_id_; }

 private:
  void append(const sim::BinaryImage& mask, std::optional<sim::Action> action);

  int capacity_;
  int rows_;
  int cols_;
  std::int64_t next_id_ = 0;
  std::deque<Frame> frames_;
  std::deque<std::int64_t> areas_;
};

std::vector<double> image_to_values(const sim::BinaryImage& mask);

// Per-frame features from the CNN.
std::vector<double> extract_features(const sim::BinaryImage& mask, const nn::ActorCritic& net);

// Memoized features for inference with fixed parameters. Clear it whenever the
// parameters change.
class FeatureMemo {
 public:
  explicit FeatureMemo(const nn::ActorCritic& net) : net_(net) {}
  std::span<const double> get(std::int64_t id, std::span<const double> image);
  void clear() { memo_.clear(); }
  const nn::ActorCritic& net() const { return net_; }

 private:
  const nn::ActorCritic& net_;
  std::map<std::int64_t, std::vector<double>> memo_;
};

Observation assemble_observation(const RollingBuffers& buffers, FeatureMemo& memo,
                                 const StateFlags& flags = {});
// Records the image features on the tape so gradients reach the CNN.
Observation assemble_observation(const RollingBuffers& buffers, const nn::ActorCritic& net,
                                 nn::Tape& tape, const StateFlags& flags = {});

}  // namespace vesnav::state
