// SPDX-License-Identifier: Apache-2.0
#include "vesnav/eval/diagnostics.hpp"

#include <random>

#include "vesnav/agent/a2c.hpp"
#include "vesnav/common.hpp"
#include "vesnav/nn/actor_critic.hpp"
#include "vesnav/nn/layers.hpp"

namespace vesnav::eval {
namespace {

void randomize(nn::Tensor& t, std::mt19937_64& rng, double scale) {
  for (double& v : t.values) v = scale * nn::standard_normal(rng);
}

std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = nn::standard_normal(rng);
  return v;
}

double weighted_sum(std::span<const double> y, std::span<const double> w) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * w[i];
  return s;
}

nn::GradCheckResult check_dense(int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  nn::ParameterSet params;
  const auto layer = nn::DenseLayer::create(params, "dense", 7, 5);
  randomize(params[layer.w].value, rng, 0.5);
  randomize(params[layer.b].value, rng, 0.5);
  const auto x = random_vector(7, rng);
  const auto w = random_vector(5, rng);
  auto loss = [&] {
    std::vector<double> y(5);
    layer.forward(params, x, y);
    return weighted_sum(y, w);
  };
  auto analytic = [&] {
    std::vector<double> dx(7);
    layer.backward(params, x, w, dx);
    return loss();
  };
  return nn::grad_check(params, analytic, loss, samples, 1e-5, seed);
}

nn::GradCheckResult check_conv(int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  nn::ParameterSet params;
  const auto layer = nn::Conv2dLayer::create(params, "conv", 2, 3);
  randomize(params[layer.w].value, rng, 0.5);
  randomize(params[layer.b].value, rng, 0.5);
  const int h = 7;
  const int wd = 6;
  const auto x = random_vector(2 * h * wd, rng);
  const std::size_t out_n = 3 * nn::Conv2dLayer::out_size(h) * nn::Conv2dLayer::out_size(wd);
  const auto w = random_vector(out_n, rng);
  auto loss = [&] {
    std::vector<double> cols;
    std::vector<double> y(out_n);
    layer.forward(params, x, h, wd, cols, y);
    return weighted_sum(y, w);
  };
  auto analytic = [&] {
    std::vector<double> cols;
    std::vector<double> y(out_n);
    layer.forward(params, x, h, wd, cols, y);
    std::vector<double> dx(x.size());
    layer.backward(params, cols, h, wd, w, dx);
    return weighted_sum(y, w);
  };
  return nn::grad_check(params, analytic, loss, samples, 1e-5, seed);
}

nn::GradCheckResult check_lstm(int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  nn::ParameterSet params;
  const int in = 4;
  const int hid = 3;
  const auto cell = nn::LstmCell::create(params, "lstm", in, hid);
  randomize(params[cell.wx].value, rng, 0.5);
  randomize(params[cell.wh].value, rng, 0.5);
  randomize(params[cell.b].value, rng, 0.5);
  const int steps = 3;
  std::vector<std::vector<double>> xs;
  std::vector<std::vector<double>> ws;
  for (int t = 0; t < steps; ++t) {
    xs.push_back(random_vector(in, rng));
    ws.push_back(random_vector(hid, rng));
  }
  auto run = [&](std::vector<nn::LstmCell::Cache>& caches) {
    std::vector<double> h(hid, 0.0), c(hid, 0.0), h2(hid), c2(hid);
    double total = 0.0;
    caches.assign(steps, {});
    for (int t = 0; t < steps; ++t) {
      cell.forward(params, xs[t], h, c, caches[t], h2, c2);
      h = h2;
      c = c2;
      total += weighted_sum(h, ws[t]);
    }
    return total;
  };
  auto loss = [&] {
    std::vector<nn::LstmCell::Cache> caches;
    return run(caches);
  };
  auto analytic = [&] {
    std::vector<nn::LstmCell::Cache> caches;
    const double total = run(caches);
    std::vector<double> dh_next(hid, 0.0), dc_next(hid, 0.0), dh(hid), dx(in), dhp(hid),
        dcp(hid);
    for (int t = steps - 1; t >= 0; --t) {
      for (int k = 0; k < hid; ++k) dh[k] = ws[t][k] + dh_next[k];
      cell.backward(params, caches[t], dh, dc_next, dx, dhp, dcp);
      dh_next = dhp;
      dc_next = dcp;
    }
    return total;
  };
  return nn::grad_check(params, analytic, loss, samples, 1e-5, seed);
}

nn::GradCheckResult check_cnn(int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  nn::ParameterSet params;
  const int side = 12;
  const auto cnn = nn::FeatureCnn::create(params, side, side, 5);
  for (auto& p : params.all()) randomize(p.value, rng, 0.5);
  std::vector<double> image(side * side);
  for (double& v : image) v = uniform01(rng) < 0.4 ? 1.0 : 0.0;
  const auto w = random_vector(5, rng);
  auto loss = [&] {
    nn::FeatureCnn::Cache cache;
    std::vector<double> f(5);
    cnn.forward(params, image, cache, f);
    return weighted_sum(f, w);
  };
  auto analytic = [&] {
    nn::FeatureCnn::Cache cache;
    std::vector<double> f(5);
    cnn.forward(params, image, cache, f);
    cnn.backward(params, image, cache, w);
    return weighted_sum(f, w);
  };
  return nn::grad_check(params, analytic, loss, samples, 1e-5, seed);
}

// A short rollout through the whole network, scored with the A2C loss.
// Advantages and returns are frozen at the initial parameters.
class ComposedProblem {
 public:
  ComposedProblem(bool use_lstm, std::uint64_t seed) : rng_(seed), net_(config(use_lstm), seed) {
    for (auto& p : net_.params().all()) {
      if (p.name.ends_with(".b")) randomize(p.value, rng_, 0.1);
    }
    net_.params().touch();
    const int side = net_.config().image_rows;
    for (int t = 0; t < kSteps + net_.config().buffer_size; ++t) {
      std::vector<double> img(side * side);
      for (double& v : img) v = uniform01(rng_) < 0.3 ? 1.0 : 0.0;
      images_.push_back(std::move(img));
    }
    for (int t = 0; t < kSteps; ++t) {
      actions_.push_back(sim::action_from_index(static_cast<int>(uniform_index(rng_, 6))));
      rewards_.push_back(nn::standard_normal(rng_));
      extras_.push_back(random_vector(net_.config().action_history_width() +
                                          net_.config().buffer_size,
                                      rng_));
    }
    const auto seg = rollout(nullptr);
    adv_ = agent::n_step_advantage(seg, 0.9);
  }

  nn::ParameterSet& params() { return net_.params(); }

  double loss() {
    const auto seg = rollout(nullptr);
    return agent::a2c_loss(seg, adv_, kEntropy, kCritic).terms.total;
  }

  double analytic(bool corrupt) {
    nn::Tape tape = net_.new_tape();
    const auto seg = rollout(&tape);
    const auto l = agent::a2c_loss(seg, adv_, kEntropy, kCritic);
    net_.backward(tape, l.grads);
    if (corrupt) {
      for (double& g : net_.params().get("core.lstm.wh").grad.values) g *= 2.0;
    }
    return l.terms.total;
  }

 private:
  static constexpr int kSteps = 4;
  static constexpr double kEntropy = 0.05;
  static constexpr double kCritic = 0.5;

  static nn::NetConfig config(bool use_lstm) {
    nn::NetConfig c;
    c.image_rows = 12;
    c.image_cols = 12;
    c.buffer_size = 2;
    c.hidden = 6;
    c.use_lstm = use_lstm;
    return c;
  }

  agent::RolloutSegment rollout(nn::Tape* tape) {
    const auto& cfg = net_.config();
    const int k = cfg.buffer_size;
    const int f = cfg.features_per_image;
    agent::RolloutSegment seg;
    auto state = nn::LSTMState::zeros(cfg.hidden);
    for (int t = 0; t < kSteps; ++t) {
      std::vector<double> x(cfg.observation_width());
      std::vector<std::int64_t> ids(k);
      for (int s = 0; s < k; ++s) {
        ids[s] = t + s;
        std::vector<double> feats;
        if (tape) {
          const auto sp = net_.image_features(*tape, ids[s], images_[t + s]);
          feats.assign(sp.begin(), sp.end());
        } else {
          feats = net_.image_features(images_[t + s]);
        }
        std::copy(feats.begin(), feats.end(), x.begin() + s * f);
      }
      std::copy(extras_[t].begin(), extras_[t].end(), x.begin() + k * f);
      auto out = tape ? net_.forward(*tape, x, ids, state) : net_.forward(x, state);
      state = out.state;
      seg.steps.push_back({out.logits, actions_[t], rewards_[t], out.value, 0.0});
    }
    seg.terminal = true;
    return seg;
  }

  std::mt19937_64 rng_;
  nn::ActorCritic net_;
  std::vector<std::vector<double>> images_;
  std::vector<sim::Action> actions_;
  std::vector<double> rewards_;
  std::vector<std::vector<double>> extras_;
  agent::Advantages adv_;
};

nn::GradCheckResult check_composed(bool use_lstm, bool mutate, int samples, std::uint64_t seed) {
  ComposedProblem problem(use_lstm, seed);
  return nn::grad_check(
      problem.params(), [&] { return problem.analytic(mutate); }, [&] { return problem.loss(); },
      samples, 1e-5, seed);
}

}  // namespace

std::vector<GradCheckCase> run_gradient_checks(int samples, std::uint64_t seed) {
  return {
      {"dense", check_dense(samples, seed)},
      {"conv2d", check_conv(samples, seed)},
      {"lstm", check_lstm(samples, seed)},
      {"feature_cnn", check_cnn(samples, seed)},
      {"actor_critic_lstm", check_composed(true, false, samples, seed)},
      {"actor_critic_dense", check_composed(false, false, samples, seed)},
  };
}

nn::GradCheckResult run_mutated_gradient_check(int samples, std::uint64_t seed) {
  return check_composed(true, true, samples, seed);
}

}  // namespace vesnav::eval
