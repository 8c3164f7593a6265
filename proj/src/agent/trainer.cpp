// SPDX-License-Identifier: Apache-2.0
#include "vesnav/agent/trainer.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "vesnav/common.hpp"
#include "vesnav/nn/checkpoint.hpp"

namespace vesnav::agent {

using nlohmann::ordered_json;

void TrainConfig::validate() const {
  if (episodes < 0) throw ConfigError("train.episodes must be >= 0");
  if (max_steps < 1) throw ConfigError("train.max_steps must be >= 1");
  if (update_every < 1 || update_every > max_steps) {
    throw ConfigError("train.update_every must lie in [1, max_steps]");
  }
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("train.gamma must lie in [0, 1]");
  if (lr_schedule.empty() || lr_schedule.front().first_episode != 0) {
    throw ConfigError("learning-rate schedule must start at episode 0");
  }
  for (std::size_t i = 0; i < lr_schedule.size(); ++i) {
    if (!(lr_schedule[i].lr > 0.0) || !std::isfinite(lr_schedule[i].lr)) {
      throw ConfigError("learning rates must be positive");
    }
    if (i > 0 && lr_schedule[i].first_episode <= lr_schedule[i - 1].first_episode) {
      throw ConfigError("learning-rate schedule boundaries must increase");
    }
  }
  if (entropy_coef < 0.0 || critic_coef < 0.0) {
    throw ConfigError("loss coefficients must be non-negative");
  }
  if (n_envs < 1) throw ConfigError("train.n_envs must be >= 1");
  if (max_grad_norm < 0.0) throw ConfigError("train.max_grad_norm must be >= 0");
  if (checkpoint_every < 1) throw ConfigError("train.checkpoint_every must be >= 1");
}

double TrainConfig::lr_at(int episode) const {
  double lr = lr_schedule.front().lr;
  for (const auto& stage : lr_schedule) {
    if (episode >= stage.first_episode) lr = stage.lr;
  }
  return lr;
}

std::string to_json_line(const EpisodeLog& log) {
  ordered_json j;
  j["episode"] = log.episode;
  j["env_id"] = log.env_id;
  j["steps"] = log.steps;
  j["return"] = log.ret;
  j["success"] = log.success;
  j["loss_actor"] = log.loss_actor;
  j["loss_critic"] = log.loss_critic;
  j["entropy"] = log.entropy;
  j["lr"] = log.lr;
  return j.dump();
}

EpisodeLog episode_log_from_json(const std::string& line) {
  ordered_json j;
  try {
    j = ordered_json::parse(line);
  } catch (const ordered_json::exception& e) {
    throw IoError(std::string("bad training log line: ") + e.what());
  }
  EpisodeLog log;
  log.episode = j.at("episode").get<int>();
  log.env_id = j.at("env_id").get<int>();
  log.steps = j.at("steps").get<int>();
  log.ret = j.at("return").get<double>();
  log.success = j.at("success").get<bool>();
  log.loss_actor = j.at("loss_actor").get<double>();
  log.loss_critic = j.at("loss_critic").get<double>();
  log.entropy = j.at("entropy").get<double>();
  log.lr = j.at("lr").get<double>();
  return log;
}

Trainer::Trainer(TrainConfig config, ModelConfig model, std::vector<sim::Environment> envs,
                 reward::RewardConfig reward, geometry::TerminationParams termination,
                 sim::MaskNoise noise)
    : config_(std::move(config)),
      model_(model),
      envs_(std::move(envs)),
      reward_(reward),
      termination_(termination),
      noise_(noise),
      net_(model.net, config_.seed),
      adam_(net_.params()),
      rng_(config_.seed) {
  config_.validate();
  reward_.validate();
  if (envs_.empty()) throw ConfigError("training needs at least one environment");
  for (const auto& env : envs_) {
    if (env.bounds.image_rows != model_.net.image_rows ||
        env.bounds.image_cols != model_.net.image_cols) {
      throw DimensionError("environment image size does not match the network");
    }
  }
}

EpisodeLog Trainer::train_episode() {
  EpisodeLog log;
  log.episode = episode_;
  log.lr = config_.lr_at(episode_);
  log.env_id = static_cast<int>(uniform_index(rng_, envs_.size()));
  const auto& env = envs_[log.env_id];
  const auto& bounds = env.bounds;
  const double d_th = reward_.vessel_threshold_px(bounds);

  auto observe = [&](const sim::ProbePose& p) {
    auto m = sim::render_slice(env.vessel, p, bounds);
    if (noise_.enabled()) m = sim::apply_mask_noise(m, noise_, rng_);
    return m;
  };

  sim::ProbePose pose = sim::reset_episode(env, d_th, rng_);
  auto mask = observe(pose);
  geometry::ViewRecognizer recognizer(d_th, bounds.image_cols, termination_);
  recognizer.observe(mask);
  state::RollingBuffers buffers(model_.net.buffer_size, bounds.image_rows, bounds.image_cols);
  buffers.reset(mask);
  auto score = reward::score_state(env, pose, mask.area(), reward_);
  nn::LSTMState lstm = nn::LSTMState::zeros(model_.net.hidden);

  bool done = false;
  while (!done && log.steps < config_.max_steps) {
    nn::Tape tape = net_.new_tape();
    RolloutSegment segment;
    while (static_cast<int>(segment.steps.size()) < config_.update_every &&
           log.steps < config_.max_steps) {
      const auto obs = state::assemble_observation(buffers, net_, tape, model_.flags);
      auto out = net_.forward(tape, obs.values, obs.image_ids, lstm);
      const auto choice = select_action(out.logits, SelectMode::kSample, rng_);

      pose = sim::apply_action(pose, choice.action, bounds);
      mask = observe(pose);
      const auto next = reward::score_state(env, pose, mask.area(), reward_);
      const double r = reward::step_reward(next, score, mask.area(), d_th, reward_);
      const auto analysis = recognizer.observe(mask);
      buffers.push_step(mask, choice.action);
      score = next;
      lstm = std::move(out.state);

      segment.steps.push_back({out.logits, choice.action, r, out.value, choice.log_prob});
      log.ret += r;
      ++log.steps;
      if (analysis.terminated) {
        done = true;
        log.success = true;
        break;
      }
    }
    segment.terminal = done;
    if (!done) {
      const auto obs = state::assemble_observation(buffers, net_, tape, model_.flags);
      segment.bootstrap_value = net_.forward(obs.values, lstm).value;
    }

    auto adv = n_step_advantage(segment, config_.gamma);
    if (config_.normalize_advantages) normalize_advantages(adv);
    const auto loss = a2c_loss(segment, adv, config_.entropy_coef, config_.critic_coef);
    log.loss_actor += loss.terms.actor;
    log.loss_critic += loss.terms.critic;
    log.entropy += loss.terms.entropy;

    net_.params().zero_grad();
    net_.backward(tape, loss.grads);
    if (config_.max_grad_norm > 0.0) nn::clip_grad_norm(net_.params(), config_.max_grad_norm);
    adam_.step(net_.params(), log.lr);
  }
  if (log.steps > 0) {
    log.loss_actor /= log.steps;
    log.loss_critic /= log.steps;
    log.entropy /= log.steps;
  }
  ++episode_;
  return log;
}

void Trainer::train(std::ostream* log, const std::string& checkpoint_path) {
  while (episode_ < config_.episodes) {
    const auto record = train_episode();
    if (log) *log << to_json_line(record) << '\n';
    if (!checkpoint_path.empty() &&
        (episode_ % config_.checkpoint_every == 0 || episode_ == config_.episodes)) {
      save_checkpoint(checkpoint_path);
    }
  }
  if (log) log->flush();
}

std::string Trainer::rng_state() const {
  std::ostringstream os;
  os << rng_;
  return os.str();
}

void Trainer::set_rng_state(const std::string& text) {
  std::istringstream is(text);
  std::mt19937_64 rng;
  is >> rng;
  if (!is) throw IoError("malformed RNG state");
  rng_ = rng;
}

namespace {

nn::Tensor model_meta(const ModelConfig& model) {
  const auto& n = model.net;
  nn::Tensor t({7});
  t.values = {static_cast<double>(n.image_rows),
              static_cast<double>(n.image_cols),
              static_cast<double>(n.features_per_image),
              static_cast<double>(n.buffer_size),
              static_cast<double>(n.hidden),
              n.use_lstm ? 1.0 : 0.0,
              model.flags.zero_area_deltas ? 1.0 : 0.0};
  return t;
}

ModelConfig meta_to_model(const nn::Tensor& t) {
  if (t.size() != 7) throw IoError("checkpoint model header has the wrong size");
  ModelConfig m;
  m.net.image_rows = static_cast<int>(t[0]);
  m.net.image_cols = static_cast<int>(t[1]);
  m.net.features_per_image = static_cast<int>(t[2]);
  m.net.buffer_size = static_cast<int>(t[3]);
  m.net.hidden = static_cast<int>(t[4]);
  m.net.use_lstm = t[5] != 0.0;
  m.flags.zero_area_deltas = t[6] != 0.0;
  return m;
}

nn::Tensor text_tensor(const std::string& s) {
  nn::Tensor t({static_cast<int>(s.size())});
  for (std::size_t i = 0; i < s.size(); ++i) t[i] = static_cast<unsigned char>(s[i]);
  return t;
}

std::string tensor_text(const nn::Tensor& t) {
  std::string s(t.size(), '\0');
  for (std::size_t i = 0; i < t.size(); ++i) s[i] = static_cast<char>(static_cast<int>(t[i]));
  return s;
}

void append_weights(nn::NamedTensors& out, const nn::ActorCritic& net) {
  for (const auto& p : net.params().all()) out.emplace_back(p.name, p.value);
}

const nn::Tensor& lookup(const nn::NamedTensors& tensors, const std::string& name) {
  for (const auto& [n, t] : tensors) {
    if (n == name) return t;
  }
  throw IoError("checkpoint is missing tensor '" + name + "'");
}

void restore_weights(const nn::NamedTensors& tensors, nn::ActorCritic& net) {
  for (auto& p : net.params().all()) {
    const auto& t = lookup(tensors, p.name);
    if (t.shape != p.value.shape) throw IoError("shape mismatch for tensor '" + p.name + "'");
    p.value = t;
  }
  net.params().touch();
}

}  // namespace

void Trainer::save_checkpoint(const std::string& path) const {
  nn::NamedTensors out;
  out.emplace_back("meta.model", model_meta(model_));
  append_weights(out, net_);
  const auto& params = net_.params().all();
  for (std::size_t i = 0; i < params.size(); ++i) {
    out.emplace_back("adam.m." + params[i].name, adam_.first_moments()[i]);
    out.emplace_back("adam.v." + params[i].name, adam_.second_moments()[i]);
  }
  nn::Tensor counters({2});
  counters.values = {static_cast<double>(episode_), static_cast<double>(adam_.steps())};
  out.emplace_back("trainer.counters", counters);
  out.emplace_back("trainer.rng", text_tensor(rng_state()));
  nn::save_tensors(path, out);
}

void Trainer::load_checkpoint(const std::string& path) {
  const auto tensors = nn::load_tensors(path);
  const auto model = meta_to_model(lookup(tensors, "meta.model"));
  if (model_meta(model).values != model_meta(model_).values) {
    throw IoError("checkpoint was written for a different model shape");
  }
  restore_weights(tensors, net_);
  const auto& params = net_.params().all();
  for (std::size_t i = 0; i < params.size(); ++i) {
    adam_.first_moments()[i] = lookup(tensors, "adam.m." + params[i].name);
    adam_.second_moments()[i] = lookup(tensors, "adam.v." + params[i].name);
  }
  const auto& counters = lookup(tensors, "trainer.counters");
  episode_ = static_cast<int>(counters[0]);
  adam_.set_steps(static_cast<std::int64_t>(counters[1]));
  set_rng_state(tensor_text(lookup(tensors, "trainer.rng")));
}

void save_model(const std::string& path, const nn::ActorCritic& net, const ModelConfig& model) {
  nn::NamedTensors out;
  out.emplace_back("meta.model", model_meta(model));
  append_weights(out, net);
  nn::save_tensors(path, out);
}

LoadedModel load_model(const std::string& path) {
  const auto tensors = nn::load_tensors(path);
  const auto model = meta_to_model(lookup(tensors, "meta.model"));
  LoadedModel loaded{model, nn::ActorCritic(model.net, 0)};
  restore_weights(tensors, loaded.net);
  return loaded;
}

}  // namespace vesnav::agent
