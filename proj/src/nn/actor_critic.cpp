// SPDX-License-Identifier: Apache-2.0
#include "vesnav/nn/actor_critic.hpp"

#include <algorithm>

#include "vesnav/common.hpp"

namespace vesnav::nn {

FeatureCnn FeatureCnn::create(ParameterSet& params, int rows, int cols, int features) {
  FeatureCnn cnn;
  cnn.rows_ = rows;
  cnn.cols_ = cols;
  cnn.conv_[0] = Conv2dLayer::create(params, "cnn.conv1", 1, 8);
  cnn.conv_[1] = Conv2dLayer::create(params, "cnn.conv2", 8, 16);
  cnn.conv_[2] = Conv2dLayer::create(params, "cnn.conv3", 16, 16);
  cnn.fc_ = DenseLayer::create(params, "cnn.fc", 16, features);
  return cnn;
}

void FeatureCnn::forward(const ParameterSet& params, std::span<const double> image, Cache& cache,
                         std::span<double> features) const {
  if (image.size() != static_cast<std::size_t>(rows_) * cols_) {
    throw DimensionError("feature extractor expects a " + std::to_string(rows_) + "x" +
                         std::to_string(cols_) + " image");
  }
  int h = rows_;
  int w = cols_;
  std::vector<double>* cols[3] = {&cache.cols1, &cache.cols2, &cache.cols3};
  std::vector<double>* acts[3] = {&cache.act1, &cache.act2, &cache.act3};
  std::span<const double> in = image;
  for (int l = 0; l < 3; ++l) {
    const int oh = Conv2dLayer::out_size(h);
    const int ow = Conv2dLayer::out_size(w);
    acts[l]->resize(static_cast<std::size_t>(conv_[l].out_c) * oh * ow);
    conv_[l].forward(params, in, h, w, *cols[l], *acts[l]);
    relu_inplace(*acts[l]);
    in = *acts[l];
    h = oh;
    w = ow;
  }
  cache.pooled.resize(conv_[2].out_c);
  global_avg_pool(cache.act3, conv_[2].out_c, h * w, cache.pooled);
  fc_.forward(params, cache.pooled, features);
}

void FeatureCnn::backward(ParameterSet& params, std::span<const double> image, const Cache& cache,
                          std::span<const double> dfeatures) const {
  (void)image;
  int hs[4] = {rows_, 0, 0, 0};
  int ws[4] = {cols_, 0, 0, 0};
  for (int l = 0; l < 3; ++l) {
    hs[l + 1] = Conv2dLayer::out_size(hs[l]);
    ws[l + 1] = Conv2dLayer::out_size(ws[l]);
  }
  std::vector<double> dpooled(conv_[2].out_c);
  fc_.backward(params, cache.pooled, dfeatures, dpooled);
  std::vector<double> dact(cache.act3.size());
  global_avg_pool_backward(dpooled, conv_[2].out_c, hs[3] * ws[3], dact);

  const std::vector<double>* cols[3] = {&cache.cols1, &cache.cols2, &cache.cols3};
  const std::vector<double>* acts[3] = {&cache.act1, &cache.act2, &cache.act3};
  for (int l = 2; l >= 0; --l) {
    relu_backward(*acts[l], dact);
    std::vector<double> din;
    if (l > 0) din.resize(acts[l - 1]->size());
    conv_[l].backward(params, *cols[l], hs[l], ws[l], dact, din);
    dact = std::move(din);
  }
}

ActorCritic::ActorCritic(const NetConfig& config, std::uint64_t init_seed) : config_(config) {
  if (config_.buffer_size < 1 || config_.features_per_image < 1 || config_.hidden < 1) {
    throw DimensionError("network config must have positive widths");
  }
  cnn_ = FeatureCnn::create(params_, config_.image_rows, config_.image_cols,
                            config_.features_per_image);
  const int in = config_.observation_width();
  if (config_.use_lstm) {
    lstm_ = LstmCell::create(params_, "core.lstm", in, config_.hidden);
  } else {
    dense_core_ = DenseLayer::create(params_, "core.dense", in, config_.hidden);
  }
  actor_ = DenseLayer::create(params_, "actor", config_.hidden, kActionCount);
  critic_ = DenseLayer::create(params_, "critic", config_.hidden, 1);

  std::mt19937_64 rng(init_seed);
  for (int l = 0; l < 3; ++l) {
    const auto& conv = cnn_.conv(l);
    init_uniform_fan_in(params_[conv.w].value, conv.in_c * 9, rng);
  }
  init_uniform_fan_in(params_[cnn_.fc().w].value, cnn_.fc().in, rng);
  if (config_.use_lstm) {
    init_uniform_fan_in(params_[lstm_.wx].value, in, rng);
    init_orthogonal_blocks(params_[lstm_.wh].value, config_.hidden, rng);
    auto& b = params_[lstm_.b].value;
    for (int k = 0; k < config_.hidden; ++k) b[config_.hidden + k] = 1.0;
  } else {
    init_uniform_fan_in(params_[dense_core_.w].value, in, rng);
  }
  init_uniform_fan_in(params_[actor_.w].value, config_.hidden, rng);
  init_uniform_fan_in(params_[critic_.w].value, config_.hidden, rng);
  params_.touch();
}

void ActorCritic::check_tape(const Tape& tape) const {
  if (tape.consumed_) throw TapeError("tape already consumed by backward");
  if (tape.version_ != params_.version()) {
    throw TapeError("stale tape: parameters changed since the forward pass");
  }
}

std::span<const double> ActorCritic::image_features(Tape& tape, std::int64_t id,
                                                    std::span<const double> image) const {
  check_tape(tape);
  auto it = tape.images_.find(id);
  if (it != tape.images_.end()) return it->second.features;
  Tape::ImageEntry entry;
  entry.image.assign(image.begin(), image.end());
  entry.features.resize(config_.features_per_image);
  cnn_.forward(params_, entry.image, entry.cache, entry.features);
  entry.dfeatures.assign(config_.features_per_image, 0.0);
  auto [pos, inserted] = tape.images_.emplace(id, std::move(entry));
  return pos->second.features;
}

std::vector<double> ActorCritic::image_features(std::span<const double> image) const {
  FeatureCnn::Cache cache;
  std::vector<double> features(config_.features_per_image);
  cnn_.forward(params_, image, cache, features);
  return features;
}

void ActorCritic::core_forward(std::span<const double> x, const LSTMState& state,
                               LstmCell::Cache* cache, StepOutput& out,
                               std::vector<double>& h) const {
  if (x.size() != static_cast<std::size_t>(config_.observation_width())) {
    throw DimensionError("observation width " + std::to_string(x.size()) + " != configured " +
                         std::to_string(config_.observation_width()));
  }
  h.assign(config_.hidden, 0.0);
  if (config_.use_lstm) {
    LstmCell::Cache local;
    out.state = LSTMState::zeros(config_.hidden);
    lstm_.forward(params_, x, state.h, state.c, cache ? *cache : local, out.state.h,
                  out.state.c);
    h = out.state.h;
  } else {
    dense_core_.forward(params_, x, h);
    tanh_inplace(h);
    out.state = state;
  }
  actor_.forward(params_, h, out.logits);
  critic_.forward(params_, h, std::span<double>(&out.value, 1));
}

StepOutput ActorCritic::forward(Tape& tape, std::span<const double> x,
                                std::span<const std::int64_t> image_ids,
                                const LSTMState& state) const {
  check_tape(tape);
  if (image_ids.size() != static_cast<std::size_t>(config_.buffer_size)) {
    throw DimensionError("expected one image id per buffer slot");
  }
  for (auto id : image_ids) {
    if (!tape.images_.count(id)) throw TapeError("image id not on tape");
  }
  Tape::StepCache step;
  step.x.assign(x.begin(), x.end());
  step.image_ids.assign(image_ids.begin(), image_ids.end());
  StepOutput out;
  core_forward(x, state, &step.lstm, out, step.h);
  tape.steps_.push_back(std::move(step));
  return out;
}

StepOutput ActorCritic::forward(std::span<const double> x, const LSTMState& state) const {
  StepOutput out;
  std::vector<double> h;
  core_forward(x, state, nullptr, out, h);
  return out;
}

void ActorCritic::backward(Tape& tape, std::span<const StepGrad> grads) {
  check_tape(tape);
  if (grads.size() != tape.steps_.size()) {
    throw TapeError("backward needs one gradient per recorded step");
  }
  tape.consumed_ = true;
  const int H = config_.hidden;
  const int F = config_.features_per_image;
  std::vector<double> dh_next(H, 0.0);
  std::vector<double> dc_next(H, 0.0);
  std::vector<double> dh(H);
  std::vector<double> tmp(H);
  std::vector<double> dx(config_.observation_width());
  std::vector<double> dh_prev(H);
  std::vector<double> dc_prev(H);
  for (std::size_t s = tape.steps_.size(); s-- > 0;) {
    const auto& step = tape.steps_[s];
    actor_.backward(params_, step.h, grads[s].dlogits, dh);
    critic_.backward(params_, step.h, std::span<const double>(&grads[s].dvalue, 1), tmp);
    for (int k = 0; k < H; ++k) dh[k] += tmp[k] + dh_next[k];
    if (config_.use_lstm) {
      lstm_.backward(params_, step.lstm, dh, dc_next, dx, dh_prev, dc_prev);
      dh_next.swap(dh_prev);
      dc_next.swap(dc_prev);
    } else {
      tanh_backward(step.h, dh);
      dense_core_.backward(params_, step.x, dh, dx);
    }
    for (int slot = 0; slot < config_.buffer_size; ++slot) {
      auto& entry = tape.images_.at(step.image_ids[slot]);
      for (int f = 0; f < F; ++f) entry.dfeatures[f] += dx[slot * F + f];
    }
  }
  for (auto& [id, entry] : tape.images_) {
    const bool any = std::any_of(entry.dfeatures.begin(), entry.dfeatures.end(),
                                 [](double v) { return v != 0.0; });
    if (any) cnn_.backward(params_, entry.image, entry.cache, entry.dfeatures);
  }
}

}  // namespace vesnav::nn
