// SPDX-License-Identifier: Apache-2.0
//
// Recurrent actor-critic network:
//
//   image buffer --CNN--> per-image features --+
//   action one-hots ---------------------------+--> LSTM(256) --> actor logits (6)
//   area deltas -------------------------------+              \-> critic value (1)
//
// With `use_lstm = false` the recurrent cell is replaced by a tanh dense layer of
// the same output width.
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <vector>

#include "vesnav/nn/layers.hpp"
#include "vesnav/nn/tensor.hpp"

namespace vesnav::nn {

inline constexpr int kActionCount = 6;

struct NetConfig {
  int image_rows = 64;
  int image_cols = 64;
  int features_per_image = 5;
  int buffer_size = 4;
  int hidden = 256;
  bool use_lstm = true;

  int image_feature_width() const { return buffer_size * features_per_image; }
  int action_history_width() const { return buffer_size * kActionCount; }
  int observation_width() const {
    return image_feature_width() + action_history_width() + buffer_size;
  }
};

struct LSTMState {
  std::vector<double> h;
  std::vector<double> c;

  static LSTMState zeros(int hidden) {
    return {std::vector<double>(hidden, 0.0), std::vector<double>(hidden, 0.0)};
  }
  friend bool operator==(const LSTMState&, const LSTMState&) = default;
};

struct StepOutput {
  std::array<double, kActionCount> logits{};
  double value = 0.0;
  LSTMState state;
};

// Loss gradients with respect to one step's outputs.
struct StepGrad {
  std::array<double, kActionCount> dlogits{};
  double dvalue = 0.0;
};

// Desk-scale feature extractor: three stride-2 3x3 conv blocks with ReLU
// (1 -> 8 -> 16 -> 16 channels), global average pooling, dense to the feature width.
class FeatureCnn {
 public:
  struct Cache {
    std::vector<double> cols1, act1, cols2, act2, cols3, act3, pooled;
  };

  static FeatureCnn create(ParameterSet& params, int rows, int cols, int features);

  void forward(const ParameterSet& params, std::span<const double> image, Cache& cache,
               std::span<double> features) const;
  void backward(ParameterSet& params, std::span<const double> image, const Cache& cache,
                std::span<const double> dfeatures) const;

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int features() const { return fc_.out; }
  const Conv2dLayer& conv(int i) const { return conv_[i]; }
  const DenseLayer& fc() const { return fc_; }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::array<Conv2dLayer, 3> conv_;
  DenseLayer fc_;
};

// Everything backward needs from a run of forward steps. A tape belongs to one
// parameter version; it is consumed by backward.
class Tape {
 public:
  struct ImageEntry {
    std::vector<double> image;
    FeatureCnn::Cache cache;
    std::vector<double> features;
    std::vector<double> dfeatures;
  };
  struct StepCache {
    std::vector<double> x;
    std::vector<std::int64_t> image_ids;
    LstmCell::Cache lstm;
    std::vector<double> h;
  };

  std::uint64_t version() const { return version_; }
  bool consumed() const { return consumed_; }
  std::size_t steps() const { return steps_.size(); }
  std::size_t images() const { return images_.size(); }

 private:
  friend class ActorCritic;
  explicit Tape(std::uint64_t version) : version_(version) {}

  std::uint64_t version_;
  bool consumed_ = false;
  std::map<std::int64_t, ImageEntry> images_;
  std::vector<StepCache> steps_;
};

class ActorCritic {
 public:
  // Image id reserved for the all-zero padding frame.
  static constexpr std::int64_t kPaddingImage = -1;

  ActorCritic(const NetConfig& config, std::uint64_t init_seed);

  const NetConfig& config() const { return config_; }
  ParameterSet& params() { return params_; }
  const ParameterSet& params() const { return params_; }

  Tape new_tape() const { return Tape(params_.version()); }

  // Features of one frame (values 0/1, row-major). Cached on the tape under `id`.
  std::span<const double> image_features(Tape& tape, std::int64_t id,
                                         std::span<const double> image) const;
  std::vector<double> image_features(std::span<const double> image) const;

  // `x` is the observation vector; its leading image blocks came from the frames
  // named in `image_ids` (one id per buffer slot).
  StepOutput forward(Tape& tape, std::span<const double> x,
                     std::span<const std::int64_t> image_ids, const LSTMState& state) const;
  StepOutput forward(std::span<const double> x, const LSTMState& state) const;

  // Accumulates parameter gradients for every step on the tape. Gradients do not
  // flow into the state the tape started from.
  void backward(Tape& tape, std::span<const StepGrad> grads);

  const FeatureCnn& cnn() const { return cnn_; }

 private:
  void check_tape(const Tape& tape) const;
  void core_forward(std::span<const double> x, const LSTMState& state, LstmCell::Cache* cache,
                    StepOutput& out, std::vector<double>& h) const;

  NetConfig config_;
  ParameterSet params_;
  FeatureCnn cnn_;
  LstmCell lstm_;
  DenseLayer dense_core_;
  DenseLayer actor_;
  DenseLayer critic_;
};

}  // namespace vesnav::nn
