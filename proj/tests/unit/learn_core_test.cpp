// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>
#include <random>

#include "vesnav/common.hpp"
#include "vesnav/eval/diagnostics.hpp"
#include "vesnav/nn/actor_critic.hpp"
#include "vesnav/nn/checkpoint.hpp"
#include "vesnav/nn/gradcheck.hpp"
#include "vesnav/nn/optim.hpp"

namespace vesnav::nn {
namespace {

NetConfig small_config(bool lstm = true) {
  NetConfig c;
  c.image_rows = 16;
  c.image_cols = 16;
  c.buffer_size = 2;
  c.hidden = 8;
  c.use_lstm = lstm;
  return c;
}

std::vector<double> random_image(std::mt19937_64& rng, int n) {
  std::vector<double> img(n);
  for (auto& v : img) v = uniform01(rng) < 0.3 ? 1.0 : 0.0;
  return img;
}

// Observation whose image slots come from the tape, other slots random.
std::vector<double> observation(ActorCritic& net, Tape& tape, std::span<const double> img,
                                std::mt19937_64& rng) {
  const auto& c = net.config();
  std::vector<double> x(c.observation_width());
  for (auto& v : x) v = uniform(rng, -1, 1);
  const auto f = net.image_features(tape, 0, img);
  for (int b = 0; b < c.buffer_size; ++b) {
    std::copy(f.begin(), f.end(), x.begin() + b * c.features_per_image);
  }
  return x;
}

TEST(TensorTest, ShapeAndCount) {
  Tensor t({2, 3, 4}, 1.5);
  EXPECT_EQ(t.size(), 24u);
  EXPECT_TRUE(t.consistent());
  EXPECT_TRUE(t.all_finite());
  t[5] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_FALSE(t.all_finite());
}

TEST(ParameterSetTest, LookupAndDuplicates) {
  ParameterSet p;
  p.add("a", {2, 2});
  p.add("b", {3});
  EXPECT_EQ(p.parameter_count(), 7u);
  EXPECT_EQ(p.find("b"), 1u);
  EXPECT_EQ(p.find("zzz"), p.size());
  EXPECT_THROW(p.get("zzz"), DimensionError);
  EXPECT_THROW(p.add("a", {1}), DimensionError);
  p.get("b").grad.values = {3, 0, 4};
  EXPECT_DOUBLE_EQ(p.grad_norm(), 5.0);
  p.zero_grad();
  EXPECT_DOUBLE_EQ(p.grad_norm(), 0.0);
}

TEST(LayersTest, DenseClosedForm) {
  ParameterSet p;
  auto d = DenseLayer::create(p, "d", 2, 2);
  p[d.w].value.values = {1, 2, 3, 4};
  p[d.b].value.values = {0.5, -0.5};
  const std::vector<double> x = {1, -1};
  std::vector<double> y(2);
  d.forward(p, x, y);
  EXPECT_DOUBLE_EQ(y[0], -0.5);
  EXPECT_DOUBLE_EQ(y[1], -1.5);
  const std::vector<double> dy = {1, 2};
  std::vector<double> dx(2);
  d.backward(p, x, dy, dx);
  EXPECT_DOUBLE_EQ(dx[0], 7.0);
  EXPECT_DOUBLE_EQ(dx[1], 10.0);
  EXPECT_EQ(p[d.w].grad.values, (std::vector<double>{1, -1, 2, -2}));
  EXPECT_EQ(p[d.b].grad.values, (std::vector<double>{1, 2}));
  std::vector<double> wrong(3);
  EXPECT_THROW(d.forward(p, wrong, y), DimensionError);
}

TEST(LayersTest, ConvOutputSize) {
  EXPECT_EQ(Conv2dLayer::out_size(64), 32);
  EXPECT_EQ(Conv2dLayer::out_size(15), 8);
  EXPECT_EQ(Conv2dLayer::out_size(1), 1);
}

TEST(LayersTest, SoftmaxIsNormalisedAndStable) {
  std::mt19937_64 rng(1);
  for (int k = 0; k < 100; ++k) {
    std::vector<double> logits(6);
    for (auto& v : logits) v = uniform(rng, -50, 50);
    const auto p = softmax(logits);
    double sum = 0.0;
    for (double v : p) sum += v;
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
  const std::vector<double> huge = {1000, 0, 0, 0, 0, 0};
  const auto lp = log_softmax(huge);
  EXPECT_NEAR(lp[0], 0.0, 1e-12);
  EXPECT_TRUE(std::isfinite(lp[1]));
  const std::vector<double> flat(6, 0.0);
  EXPECT_NEAR(entropy_from_log_probs(log_softmax(flat)), std::log(6.0), 1e-12);
}

TEST(LayersTest, LstmHiddenStateIsBounded) {
  ParameterSet p;
  auto cell = LstmCell::create(p, "l", 5, 4);
  std::mt19937_64 rng(3);
  for (auto& t : p.all())
    for (auto& v : t.value.values) v = uniform(rng, -5, 5);
  std::vector<double> h(4, 0.0), c(4, 0.0), h2(4), c2(4);
  LstmCell::Cache cache;
  for (int step = 0; step < 200; ++step) {
    std::vector<double> x(5);
    for (auto& v : x) v = uniform(rng, -100, 100);
    cell.forward(p, x, h, c, cache, h2, c2);
    for (double v : h2) ASSERT_LE(std::abs(v), 1.0);
    h = h2;
    c = c2;
  }
}

TEST(InitTest, FanInBoundAndOrthogonalBlocks) {
  std::mt19937_64 rng(5);
  Tensor t({50, 12});
  init_uniform_fan_in(t, 12, rng);
  const double bound = std::sqrt(3.0 / 12);
  for (double v : t.values) ASSERT_LE(std::abs(v), bound);
  Tensor q({12, 4});
  init_orthogonal_blocks(q, 4, rng);
  for (int blk = 0; blk < 3; ++blk) {
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        double dotp = 0.0;
        for (int r = 0; r < 4; ++r) dotp += q[(blk * 4 + r) * 4 + i] * q[(blk * 4 + r) * 4 + j];
        EXPECT_NEAR(dotp, i == j ? 1.0 : 0.0, 1e-12);
      }
    }
  }
  Tensor bad({5, 4});
  EXPECT_THROW(init_orthogonal_blocks(bad, 4, rng), DimensionError);
}

TEST(ActorCriticTest, SameSeedSameWeights) {
  ActorCritic a(small_config(), 11), b(small_config(), 11), c(small_config(), 12);
  for (std::size_t i = 0; i < a.params().size(); ++i) {
    EXPECT_EQ(a.params()[i].value, b.params()[i].value);
  }
  EXPECT_NE(a.params().get("actor.w").value, c.params().get("actor.w").value);
}

TEST(ActorCriticTest, ForgetGateBiasStartsAtOne) {
  ActorCritic net(small_config(), 1);
  const auto& b = net.params().get("core.lstm.b").value;
  for (int k = 0; k < 8; ++k) {
    EXPECT_EQ(b[k], 0.0);
    EXPECT_EQ(b[8 + k], 1.0);
  }
}

TEST(ActorCriticTest, ZeroWeightsGiveUniformPolicyAndZeroValue) {
  for (bool lstm : {true, false}) {
    ActorCritic net(small_config(lstm), 3);
    for (auto& p : net.params().all()) p.value.fill(0.0);
    net.params().touch();
    std::vector<double> x(net.config().observation_width(), 0.7);
    const auto out = net.forward(x, LSTMState::zeros(8));
    for (double l : out.logits) EXPECT_EQ(l, 0.0);
    EXPECT_EQ(out.value, 0.0);
    const auto p = softmax(out.logits);
    for (double v : p) EXPECT_NEAR(v, 1.0 / 6.0, 1e-15);
  }
}

TEST(ActorCriticTest, TapeForwardMatchesPlainForward) {
  ActorCritic net(small_config(), 4);
  std::mt19937_64 rng(2);
  auto tape = net.new_tape();
  const auto img = random_image(rng, 256);
  const auto x = observation(net, tape, img, rng);
  const std::vector<std::int64_t> ids = {0, 0};
  const auto a = net.forward(tape, x, ids, LSTMState::zeros(8));
  const auto b = net.forward(x, LSTMState::zeros(8));
  EXPECT_EQ(a.logits, b.logits);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.state, b.state);
  EXPECT_EQ(net.image_features(img), std::vector<double>(x.begin(), x.begin() + 5));
}

TEST(ActorCriticTest, ZeroLossGradientLeavesGradientsAtZero) {
  ActorCritic net(small_config(), 4);
  std::mt19937_64 rng(2);
  auto tape = net.new_tape();
  const auto img = random_image(rng, 256);
  const auto x = observation(net, tape, img, rng);
  const std::vector<std::int64_t> ids = {0, 0};
  net.forward(tape, x, ids, LSTMState::zeros(8));
  net.params().zero_grad();
  const std::vector<StepGrad> grads(1);
  net.backward(tape, grads);
  EXPECT_EQ(net.params().grad_norm(), 0.0);
}

TEST(ActorCriticTest, TapeMisuseIsReported) {
  ActorCritic net(small_config(), 4);
  std::mt19937_64 rng(2);
  const std::vector<std::int64_t> ids = {0, 0};
  const std::vector<StepGrad> one(1);
  {
    auto tape = net.new_tape();
    const auto x = observation(net, tape, random_image(rng, 256), rng);
    net.forward(tape, x, ids, LSTMState::zeros(8));
    net.params().touch();
    EXPECT_THROW(net.backward(tape, one), TapeError);
  }
  {
    auto tape = net.new_tape();
    const auto x = observation(net, tape, random_image(rng, 256), rng);
    net.forward(tape, x, ids, LSTMState::zeros(8));
    EXPECT_THROW(net.backward(tape, std::vector<StepGrad>(2)), TapeError);
    auto again = net.new_tape();
    const auto y = observation(net, again, random_image(rng, 256), rng);
    net.forward(again, y, ids, LSTMState::zeros(8));
    net.backward(again, one);
    EXPECT_THROW(net.backward(again, one), TapeError);
  }
  {
    auto tape = net.new_tape();
    const auto x = observation(net, tape, random_image(rng, 256), rng);
    const std::vector<std::int64_t> unknown = {0, 42};
    EXPECT_THROW(net.forward(tape, x, unknown, LSTMState::zeros(8)), TapeError);
  }
}

TEST(ActorCriticTest, WrongShapesAreDimensionErrors) {
  ActorCritic net(small_config(), 4);
  std::vector<double> x(net.config().observation_width() + 1);
  EXPECT_THROW(net.forward(x, LSTMState::zeros(8)), DimensionError);
  std::vector<double> img(100);
  EXPECT_THROW(net.image_features(img), DimensionError);
  auto bad = small_config();
  bad.hidden = 0;
  EXPECT_THROW(ActorCritic(bad, 1), DimensionError);
}

TEST(GradCheckTest, LinearModelIsExact) {
  ParameterSet p;
  p.add("w", {10});
  std::mt19937_64 rng(1);
  std::vector<double> a(10);
  for (auto& v : a) v = uniform(rng, 0.5, 2.0);
  for (auto& v : p.get("w").value.values) v = uniform(rng, -1, 1);
  auto loss = [&] {
    double s = 0.0;
    for (int i = 0; i < 10; ++i) s += a[i] * p.get("w").value[i];
    return s;
  };
  auto analytic = [&] {
    p.get("w").grad.values = a;
    return loss();
  };
  const auto r = grad_check(p, analytic, loss, 10);
  EXPECT_LT(r.max_relative_error, 1e-9);
  EXPECT_EQ(r.samples, 10);
}

TEST(GradCheckTest, EveryLayerAndTheComposedLossPass) {
  const auto cases = eval::run_gradient_checks(200, 7);
  ASSERT_EQ(cases.size(), 6u);
  for (const auto& c : cases) {
    EXPECT_LT(c.result.max_relative_error, 1e-4) << c.name << " worst " << c.result.worst_parameter;
    EXPECT_GT(c.result.samples, 0) << c.name;
  }
}

TEST(GradCheckTest, CorruptedGradientIsCaught) {
  const auto r = eval::run_mutated_gradient_check(200, 7);
  EXPECT_GT(r.max_relative_error, 0.1);
  EXPECT_EQ(r.worst_parameter.rfind("core.lstm.wh", 0), 0u) << r.worst_parameter;
}

TEST(AdamTest, FirstStepMovesByTheLearningRate) {
  ParameterSet p;
  p.add("w", {3});
  p.get("w").value.values = {1, 1, 1};
  p.get("w").grad.values = {0.5, -2.0, 0.0};
  Adam adam(p);
  EXPECT_TRUE(adam.step(p, 0.01));
  EXPECT_NEAR(p.get("w").value[0], 0.99, 1e-9);
  EXPECT_NEAR(p.get("w").value[1], 1.01, 1e-9);
  EXPECT_DOUBLE_EQ(p.get("w").value[2], 1.0);
  EXPECT_EQ(adam.steps(), 1);
}

TEST(AdamTest, ConstantGradientKeepsUnitSteps) {
  ParameterSet p;
  p.add("w", {1});
  Adam adam(p);
  for (int k = 0; k < 50; ++k) {
    p.get("w").grad.values = {3.0};
    adam.step(p, 0.1);
  }
  EXPECT_NEAR(p.get("w").value[0], -5.0, 1e-6);
}

TEST(AdamTest, NonFiniteGradientRejectsTheUpdate) {
  ParameterSet p;
  p.add("w", {2});
  p.get("w").value.values = {1, 2};
  p.get("w").grad.values = {1, std::numeric_limits<double>::infinity()};
  Adam adam(p);
  const auto version = p.version();
  EXPECT_FALSE(adam.step(p, 0.1));
  EXPECT_EQ(p.get("w").value.values, (std::vector<double>{1, 2}));
  EXPECT_EQ(adam.steps(), 0);
  EXPECT_EQ(adam.first_moments()[0].values, (std::vector<double>{0, 0}));
  EXPECT_EQ(p.version(), version);
}

TEST(AdamTest, ClippingRescalesToTheBound) {
  ParameterSet p;
  p.add("w", {2});
  p.get("w").grad.values = {3, 4};
  EXPECT_DOUBLE_EQ(clip_grad_norm(p, 1.0), 5.0);
  EXPECT_NEAR(p.get("w").grad[0], 0.6, 1e-15);
  EXPECT_NEAR(p.get("w").grad[1], 0.8, 1e-15);
  EXPECT_DOUBLE_EQ(clip_grad_norm(p, 0.0), 1.0);
}

TEST(CheckpointTest, TensorsRoundTripBitExactly) {
  NamedTensors in;
  Tensor a({2, 2});
  a.values = {1.0 / 3.0, -0.0, 4.9e-324, 1e308};
  in.emplace_back("a", a);
  in.emplace_back("empty", Tensor({0}));
  Tensor nan({1});
  nan.values = {std::numeric_limits<double>::quiet_NaN()};
  in.emplace_back("nan", nan);
  const auto bytes = encode_tensors(in);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "VNRL");
  const auto out = decode_tensors(bytes);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out[0].first, "a");
  EXPECT_EQ(std::memcmp(out[0].second.data(), a.data(), 4 * sizeof(double)), 0);
  EXPECT_TRUE(std::signbit(out[0].second[1]));
  EXPECT_TRUE(std::isnan(out[2].second[0]));
  EXPECT_EQ(encode_tensors(out), bytes);
}

TEST(CheckpointTest, CorruptFilesAreRejected) {
  NamedTensors in;
  in.emplace_back("a", Tensor({3}, 2.0));
  auto bytes = encode_tensors(in);
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(decode_tensors(bad_magic), IoError);
  auto truncated = bytes;
  truncated.resize(truncated.size() - 3);
  EXPECT_THROW(decode_tensors(truncated), IoError);
  auto trailing = bytes;
  trailing.push_back(0);
  EXPECT_THROW(decode_tensors(trailing), IoError);
  EXPECT_THROW(load_tensors("/nonexistent/checkpoint.bin"), IoError);
}

TEST(CheckpointTest, NetworkWeightsSurviveAFile) {
  ActorCritic net(small_config(), 9);
  NamedTensors out;
  for (const auto& p : net.params().all()) out.emplace_back(p.name, p.value);
  const auto path = (std::filesystem::temp_directory_path() / "vesnav_ckpt_test.bin").string();
  save_tensors(path, out);
  const auto back = load_tensors(path);
  std::filesystem::remove(path);
  ASSERT_EQ(back.size(), out.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    EXPECT_EQ(back[i].first, out[i].first);
    EXPECT_EQ(back[i].second, out[i].second);
  }
}

}  // namespace
}  // namespace vesnav::nn
