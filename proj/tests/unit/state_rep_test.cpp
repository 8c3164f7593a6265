// SPDX-License-Identifier: Apache-2.0
#include "vesnav/state/state_rep.hpp"

#include <gtest/gtest.h>

#include <random>

#include "vesnav/common.hpp"

namespace vesnav::state {
namespace {

using sim::Action;
using sim::BinaryImage;

nn::NetConfig net_config(int buffer) {
  nn::NetConfig c;
  c.image_rows = 16;
  c.image_cols = 16;
  c.buffer_size = buffer;
  c.hidden = 8;
  return c;
}

BinaryImage filled(int n) {
  BinaryImage m(16, 16);
  for (int i = 0; i < n; ++i) m.set(i / 16, i % 16, true);
  return m;
}

TEST(RollingBuffersTest, FirstFrameHasNoActionAndNoDelta) {
  RollingBuffers b(4, 16, 16);
  b.reset(filled(10));
  ASSERT_EQ(b.frames().size(), 1u);
  EXPECT_FALSE(b.frames()[0].action);
  EXPECT_EQ(b.frames()[0].delta, 0.0);
  EXPECT_EQ(b.areas().back(), 10);
}

TEST(RollingBuffersTest, OldestFramesFallOutFirst) {
  RollingBuffers b(3, 16, 16);
  b.reset(filled(0));
  const int areas[] = {16, 48, 40, 40, 72};
  for (int a : areas) b.push_step(filled(a), Action::kPlusYaw);
  ASSERT_EQ(b.frames().size(), 3u);
  EXPECT_EQ(b.frames()[0].id, 3);
  EXPECT_EQ(b.frames()[2].id, 5);
  EXPECT_DOUBLE_EQ(b.frames()[0].delta, -8.0 / 256.0);
  EXPECT_DOUBLE_EQ(b.frames()[1].delta, 0.0);
  EXPECT_DOUBLE_EQ(b.frames()[2].delta, 32.0 / 256.0);
  EXPECT_EQ(b.areas(), (std::deque<std::int64_t>{48, 40, 40, 72}));
  b.reset(filled(5));
  EXPECT_EQ(b.frames().size(), 1u);
  EXPECT_EQ(b.next_id(), 1);
}

TEST(RollingBuffersTest, MisuseIsRejected) {
  EXPECT_THROW(RollingBuffers(0, 16, 16), ConfigError);
  RollingBuffers b(2, 16, 16);
  EXPECT_THROW(b.push_step(filled(1), Action::kPlusX), ConfigError);
  EXPECT_THROW(b.reset(BinaryImage(8, 8)), DimensionError);
}

TEST(AssembleTest, LayoutMatchesAHandBuiltVector) {
  nn::ActorCritic net(net_config(4), 2);
  FeatureMemo memo(net);
  RollingBuffers b(4, 16, 16);
  b.reset(filled(20));
  b.push_step(filled(36), Action::kMinusY);
  b.push_step(filled(4), Action::kPlusYaw);
  const auto obs = assemble_observation(b, memo);
  ASSERT_EQ(obs.values.size(), 4u * (5 + 6 + 1));
  EXPECT_EQ(obs.image_ids,
            (std::vector<std::int64_t>{nn::ActorCritic::kPaddingImage, 0, 1, 2}));

  std::vector<double> expected;
  const auto pad = net.image_features(std::vector<double>(256, 0.0));
  expected.insert(expected.end(), pad.begin(), pad.end());
  for (int a : {20, 36, 4}) {
    const auto f = extract_features(filled(a), net);
    expected.insert(expected.end(), f.begin(), f.end());
  }
  const std::vector<double> actions = {0, 0, 0, 0, 0, 0,  // padding
                                       0, 0, 0, 0, 0, 0,  // initial frame
                                       0, 0, 0, 1, 0, 0,  // -Y
                                       0, 0, 0, 0, 1, 0};  // +YAW
  expected.insert(expected.end(), actions.begin(), actions.end());
  for (double d : {0.0, 0.0, 16.0 / 256.0, -32.0 / 256.0}) expected.push_back(d);
  EXPECT_EQ(obs.values, expected);
}

TEST(AssembleTest, WidthFollowsTheBufferSize) {
  for (auto [buffer, width] : {std::pair{4, 48}, std::pair{8, 96}, std::pair{1, 12}}) {
    auto cfg = net_config(buffer);
    nn::ActorCritic net(cfg, 2);
    FeatureMemo memo(net);
    RollingBuffers b(buffer, 16, 16);
    b.reset(filled(3));
    EXPECT_EQ(assemble_observation(b, memo).values.size(), static_cast<std::size_t>(width));
    EXPECT_EQ(cfg.observation_width(), width);
  }
}

TEST(AssembleTest, ZeroDeltaFlagClearsOnlyTheDeltaBlock) {
  nn::ActorCritic net(net_config(4), 2);
  FeatureMemo memo(net);
  RollingBuffers b(4, 16, 16);
  b.reset(filled(20));
  b.push_step(filled(60), Action::kPlusX);
  const auto with = assemble_observation(b, memo);
  const auto without = assemble_observation(b, memo, {true});
  for (std::size_t i = 0; i < 44; ++i) EXPECT_EQ(with.values[i], without.values[i]);
  for (std::size_t i = 44; i < 48; ++i) EXPECT_EQ(without.values[i], 0.0);
  EXPECT_NE(with.values[47], 0.0);
}

TEST(AssembleTest, StaticFramesHaveZeroDeltas) {
  nn::ActorCritic net(net_config(4), 2);
  FeatureMemo memo(net);
  RollingBuffers b(4, 16, 16);
  b.reset(filled(30));
  for (int k = 0; k < 6; ++k) b.push_step(filled(30), Action::kPlusYaw);
  const auto obs = assemble_observation(b, memo);
  for (std::size_t i = 44; i < 48; ++i) EXPECT_EQ(obs.values[i], 0.0);
}

TEST(AssembleTest, TapeAndMemoAgree) {
  nn::ActorCritic net(net_config(4), 6);
  FeatureMemo memo(net);
  RollingBuffers b(4, 16, 16);
  b.reset(filled(7));
  b.push_step(filled(19), Action::kMinusX);
  auto tape = net.new_tape();
  const auto a = assemble_observation(b, memo);
  const auto t = assemble_observation(b, net, tape);
  EXPECT_EQ(a.values, t.values);
  EXPECT_EQ(a.image_ids, t.image_ids);
  EXPECT_EQ(tape.images(), 3u);  // padding frame plus frames 0 and 1
}

TEST(FeatureTest, TranslatedMaskChangesTheFeatures) {
  nn::ActorCritic net(net_config(1), 3);
  BinaryImage a(16, 16), b(16, 16);
  for (int r = 4; r < 8; ++r)
    for (int c = 0; c < 16; ++c) {
      a.set(r, c, true);
      b.set(r + 6, c, true);
    }
  EXPECT_NE(extract_features(a, net), extract_features(b, net));
}

TEST(FeatureTest, EmptyMaskWithZeroBiasesGivesZeroFeatures) {
  nn::ActorCritic net(net_config(1), 3);
  for (auto& p : net.params().all()) {
    if (p.name.size() > 2 && p.name.substr(p.name.size() - 2) == ".b") p.value.fill(0.0);
  }
  net.params().touch();
  for (double f : extract_features(BinaryImage(16, 16), net)) EXPECT_EQ(f, 0.0);
}

TEST(FeatureTest, ResolutionMismatchThrows) {
  nn::ActorCritic net(net_config(1), 3);
  EXPECT_THROW(extract_features(BinaryImage(64, 64), net), DimensionError);
}

TEST(FeatureTest, MemoReturnsTheStoredFeatures) {
  nn::ActorCritic net(net_config(1), 3);
  FeatureMemo memo(net);
  const auto img = image_to_values(filled(40));
  const std::vector<double> first(memo.get(5, img).begin(), memo.get(5, img).end());
  const auto other = image_to_values(filled(90));
  const auto second = memo.get(5, other);
  EXPECT_EQ(first, std::vector<double>(second.begin(), second.end()));
  memo.clear();
  const auto third = memo.get(5, other);
  EXPECT_EQ(std::vector<double>(third.begin(), third.end()), extract_features(filled(90), net));
}

}  // namespace
}  // namespace vesnav::state
