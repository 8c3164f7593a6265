// SPDX-License-Identifier: Apache-2.0
#include "vesnav/state/state_rep.hpp"

#include <algorithm>

#include "vesnav/common.hpp"

namespace vesnav::state {
namespace {

template <typename FeatureFn>
Observation assemble(const RollingBuffers& buffers, int features_per_image,
                     const StateFlags& flags, FeatureFn&& features) {
  const int k = buffers.capacity();
  const int F = features_per_image;
  Observation obs;
  obs.values.assign(static_cast<std::size_t>(k) * (F + nn::kActionCount + 1), 0.0);
  obs.image_ids.assign(k, nn::ActorCritic::kPaddingImage);
  const std::vector<double> blank(static_cast<std::size_t>(buffers.rows()) * buffers.cols(), 0.0);

  const auto& frames = buffers.frames();
  const int pad = k - static_cast<int>(frames.size());
  const std::size_t action_base = static_cast<std::size_t>(k) * F;
  const std::size_t delta_base = action_base + static_cast<std::size_t>(k) * nn::kActionCount;
  for (int slot = 0; slot < k; ++slot) {
    std::span<const double> f;
    if (slot < pad) {
      f = features(nn::ActorCritic::kPaddingImage, blank);
      std::copy(f.begin(), f.end(), obs.values.begin() + static_cast<std::ptrdiff_t>(slot * F));
      continue;
    }
    const auto& frame = frames[slot - pad];
    obs.image_ids[slot] = frame.id;
    f = features(frame.id, frame.image);
    std::copy(f.begin(), f.end(), obs.values.begin() + static_cast<std::ptrdiff_t>(slot * F));
    if (frame.action) {
      obs.values[action_base + slot * nn::kActionCount + static_cast<int>(*frame.action)] = 1.0;
    }
    if (!flags.zero_area_deltas) obs.values[delta_base + slot] = frame.delta;
  }
  return obs;
}

}  // namespace

RollingBuffers::RollingBuffers(int capacity, int rows, int cols)
    : capacity_(capacity), rows_(rows), cols_(cols) {
  if (capacity < 1) throw ConfigError("buffer size must be at least 1");
}

void RollingBuffers::append(const sim::BinaryImage& mask, std::optional<sim::Action> action) {
  if (mask.rows() != rows_ || mask.cols() != cols_) {
    throw DimensionError("frame resolution does not match the buffer");
  }
  Frame f;
  f.id = next_id_++;
  f.image = image_to_values(mask);
  f.action = action;
  if (!areas_.empty()) {
    f.delta = static_cast<double>(mask.area() - areas_.back()) / (double(rows_) * cols_);
  }
  frames_.push_back(std::move(f));
  while (static_cast<int>(frames_.size()) > capacity_) frames_.pop_front();
  areas_.push_back(mask.area());
  while (static_cast<int>(areas_.size()) > capacity_ + 1) areas_.pop_front();
}

void RollingBuffers::reset(const sim::BinaryImage& initial) {
  frames_.clear();
  areas_.clear();
  next_id_ = 0;
  append(initial, std::nullopt);
}

void RollingBuffers::push_step(const sim::BinaryImage& mask, sim::Action action) {
  if (areas_.empty()) throw ConfigError("push_step before reset");
  append(mask, action);
}

std::vector<double> image_to_values(const sim::BinaryImage& mask) {
  std::vector<double> v(mask.pixels().size());
  std::transform(mask.pixels().begin(), mask.pixels().end(), v.begin(),
                 [](std::uint8_t p) { return p ? 1.0 : 0.0; });
  return v;
}

std::vector<double> extract_features(const sim::BinaryImage& mask, const nn::ActorCritic& net) {
  if (mask.rows() != net.config().image_rows || mask.cols() != net.config().image_cols) {
    throw DimensionError("mask resolution does not match the feature extractor");
  }
  return net.image_features(image_to_values(mask));
}

std::span<const double> FeatureMemo::get(std::int64_t id, std::span<const double> image) {
  auto it = memo_.find(id);
  if (it == memo_.end()) it = memo_.emplace(id, net_.image_features(image)).first;
  return it->second;
}

Observation assemble_observation(const RollingBuffers& buffers, FeatureMemo& memo,
                                 const StateFlags& flags) {
  return assemble(buffers, memo.net().config().features_per_image, flags,
                  [&](std::int64_t id, std::span<const double> img) { return memo.get(id, img); });
}

Observation assemble_observation(const RollingBuffers& buffers, const nn::ActorCritic& net,
                                 nn::Tape& tape, const StateFlags& flags) {
  return assemble(buffers, net.config().features_per_image, flags,
                  [&](std::int64_t id, std::span<const double> img) {
                    return net.image_features(tape, id, img);
                  });
}

}  // namespace vesnav::state
