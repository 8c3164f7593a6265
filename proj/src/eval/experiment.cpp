// SPDX-License-Identifier: Apache-2.0
#include "vesnav/eval/experiment.hpp"

#include <sstream>

#include "vesnav/common.hpp"
#include "vesnav/config/config.hpp"

namespace vesnav::eval {

using config::Entry;
using config::parse_bool;
using config::parse_double;
using config::parse_int;

void EvalConfig::validate() const {
  if (n_envs < 1) throw ConfigError("eval.n_envs must be >= 1");
  if (episodes < 1) throw ConfigError("eval.episodes must be >= 1");
  if (max_steps < 1) throw ConfigError("eval.max_steps must be >= 1");
  if (!(flip_rate >= 0.0 && flip_rate <= 1.0)) throw ConfigError("eval.flip_rate must lie in [0, 1]");
}

void ExperimentConfig::validate() const {
  bounds.validate();
  if (ranges.radius_min_mm <= 0.0 || ranges.radius_max_mm < ranges.radius_min_mm) {
    throw ConfigError("env radius range is invalid");
  }
  if (ranges.depth_min_mm <= 0.0 || ranges.depth_max_mm < ranges.depth_min_mm) {
    throw ConfigError("env depth range is invalid");
  }
  if (!(ranges.anchor_fraction > 0.0 && ranges.anchor_fraction <= 1.0)) {
    throw ConfigError("env.anchor_fraction must lie in (0, 1]");
  }
  if (!(train_noise.flip_rate >= 0.0 && train_noise.flip_rate <= 1.0)) {
    throw ConfigError("env.flip_rate must lie in [0, 1]");
  }
  reward.validate();
  if (!(termination.ratio_bound > 0.0) || !(termination.height_threshold_px_at_256 >= 0.0) ||
      !(termination.width_fraction > 0.0 && termination.width_fraction <= 1.0)) {
    throw ConfigError("termination parameters are out of range");
  }
  const auto& n = model.net;
  if (n.buffer_size < 1 || n.features_per_image < 1 || n.hidden < 1) {
    throw ConfigError("model widths must be positive");
  }
  if (n.image_rows != bounds.image_rows || n.image_cols != bounds.image_cols) {
    throw ConfigError("model image size must match env image size");
  }
  train.validate();
  eval.validate();
  const auto lo_a = train_seed_base;
  const auto hi_a = train_seed_base + static_cast<std::uint64_t>(train.n_envs);
  const auto lo_b = heldout_seed_base;
  const auto hi_b = heldout_seed_base + static_cast<std::uint64_t>(eval.n_envs);
  if (lo_a < hi_b && lo_b < hi_a) {
    throw ConfigError("training and held-out environment seed ranges overlap");
  }
}

std::vector<sim::Environment> ExperimentConfig::training_environments() const {
  std::vector<sim::Environment> envs;
  for (int i = 0; i < train.n_envs; ++i) {
    envs.push_back(sim::generate_environment(train_seed_base + i, bounds, ranges));
  }
  return envs;
}

std::vector<sim::Environment> ExperimentConfig::heldout_environments() const {
  std::vector<sim::Environment> envs;
  for (int i = 0; i < eval.n_envs; ++i) {
    envs.push_back(sim::generate_environment(heldout_seed_base + i, bounds, ranges));
  }
  return envs;
}

agent::EpisodeSettings ExperimentConfig::episode_settings() const {
  agent::EpisodeSettings s;
  s.max_steps = eval.max_steps;
  s.reward = reward;
  s.termination = termination;
  s.noise = eval.noise();
  return s;
}

namespace {

std::string trimmed(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t") - first + 1);
}

}  // namespace

std::vector<agent::LrStage> parse_lr_schedule(std::string_view text) {
  std::vector<agent::LrStage> stages;
  std::string item;
  std::istringstream in{std::string(text)};
  while (std::getline(in, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      throw ConfigError("learning-rate stage '" + item + "' must look like episode:lr");
    }
    const Entry ep{"lr_schedule", trimmed(item.substr(0, colon)), 0};
    const Entry lr{"lr_schedule", trimmed(item.substr(colon + 1)), 0};
    stages.push_back({static_cast<int>(parse_int(ep)), parse_double(lr)});
  }
  if (stages.empty()) throw ConfigError("learning-rate schedule is empty");
  return stages;
}

std::string format_lr_schedule(const std::vector<agent::LrStage>& stages) {
  std::string out;
  for (const auto& s : stages) {
    if (!out.empty()) out += ", ";
    out += std::to_string(s.first_episode) + ":" + config::format_double(s.lr);
  }
  return out;
}

namespace {

int as_int(const Entry& e) { return static_cast<int>(parse_int(e)); }

std::uint64_t as_seed(const Entry& e) {
  const auto v = parse_int(e);
  if (v < 0) throw ConfigError("line " + std::to_string(e.line) + ": seed must be >= 0");
  return static_cast<std::uint64_t>(v);
}

void read_env(const std::vector<Entry>& entries, ExperimentConfig& c) {
  for (const auto& e : entries) {
    const auto& k = e.key;
    if (k == "width_mm") c.bounds.width_mm = parse_double(e);
    else if (k == "height_mm") c.bounds.height_mm = parse_double(e);
    else if (k == "image_depth_mm") c.bounds.image_depth_mm = parse_double(e);
    else if (k == "image_width_mm") c.bounds.image_width_mm = parse_double(e);
    else if (k == "image_rows") c.bounds.image_rows = as_int(e);
    else if (k == "image_cols") c.bounds.image_cols = as_int(e);
    else if (k == "radius_min_mm") c.ranges.radius_min_mm = parse_double(e);
    else if (k == "radius_max_mm") c.ranges.radius_max_mm = parse_double(e);
    else if (k == "depth_min_mm") c.ranges.depth_min_mm = parse_double(e);
    else if (k == "depth_max_mm") c.ranges.depth_max_mm = parse_double(e);
    else if (k == "anchor_fraction") c.ranges.anchor_fraction = parse_double(e);
    else if (k == "train_seed_base") c.train_seed_base = as_seed(e);
    else if (k == "heldout_seed_base") c.heldout_seed_base = as_seed(e);
    else if (k == "flip_rate") c.train_noise.flip_rate = parse_double(e);
    else if (k == "erode") c.train_noise.erode = parse_bool(e);
    else config::unknown_key("env", e);
  }
}

void read_reward(const std::vector<Entry>& entries, reward::RewardConfig& r) {
  for (const auto& e : entries) {
    const auto& k = e.key;
    if (k == "mu_dis") r.mu_dis = parse_double(e);
    else if (k == "mu_ves") r.mu_ves = parse_double(e);
    else if (k == "D_th_px_at_256") r.D_th_px_at_256 = parse_double(e);
    else if (k == "near_goal") r.near_goal = parse_double(e);
    else if (k == "goal") r.goal = parse_double(e);
    else if (k == "no_vessel_penalty") r.no_vessel_penalty = parse_double(e);
    else if (k == "near_reward") r.near_reward = parse_double(e);
    else if (k == "goal_reward") r.goal_reward = parse_double(e);
    else config::unknown_key("reward", e);
  }
}

void read_termination(const std::vector<Entry>& entries, geometry::TerminationParams& t) {
  for (const auto& e : entries) {
    const auto& k = e.key;
    if (k == "ratio_bound") t.ratio_bound = parse_double(e);
    else if (k == "height_threshold_px_at_256") t.height_threshold_px_at_256 = parse_double(e);
    else if (k == "width_fraction") t.width_fraction = parse_double(e);
    else config::unknown_key("termination", e);
  }
}

void read_model(const std::vector<Entry>& entries, agent::ModelConfig& m) {
  for (const auto& e : entries) {
    const auto& k = e.key;
    if (k == "features_per_image") m.net.features_per_image = as_int(e);
    else if (k == "buffer_size") m.net.buffer_size = as_int(e);
    else if (k == "hidden") m.net.hidden = as_int(e);
    else if (k == "use_lstm") m.net.use_lstm = parse_bool(e);
    else if (k == "zero_area_deltas") m.flags.zero_area_deltas = parse_bool(e);
    else config::unknown_key("model", e);
  }
}

void read_train(const std::vector<Entry>& entries, agent::TrainConfig& t) {
  for (const auto& e : entries) {
    const auto& k = e.key;
    if (k == "episodes") t.episodes = as_int(e);
    else if (k == "max_steps") t.max_steps = as_int(e);
    else if (k == "update_every") t.update_every = as_int(e);
    else if (k == "gamma") t.gamma = parse_double(e);
    else if (k == "lr_schedule") t.lr_schedule = parse_lr_schedule(e.value);
    else if (k == "entropy_coef") t.entropy_coef = parse_double(e);
    else if (k == "critic_coef") t.critic_coef = parse_double(e);
    else if (k == "n_envs") t.n_envs = as_int(e);
    else if (k == "seed") t.seed = as_seed(e);
    else if (k == "normalize_advantages") t.normalize_advantages = parse_bool(e);
    else if (k == "max_grad_norm") t.max_grad_norm = parse_double(e);
    else if (k == "checkpoint_every") t.checkpoint_every = as_int(e);
    else config::unknown_key("train", e);
  }
}

void read_eval(const std::vector<Entry>& entries, EvalConfig& v) {
  for (const auto& e : entries) {
    const auto& k = e.key;
    if (k == "n_envs") v.n_envs = as_int(e);
    else if (k == "episodes") v.episodes = as_int(e);
    else if (k == "max_steps") v.max_steps = as_int(e);
    else if (k == "seed") v.seed = as_seed(e);
    else if (k == "flip_rate") v.flip_rate = parse_double(e);
    else if (k == "erode") v.erode = parse_bool(e);
    else config::unknown_key("eval", e);
  }
}

}  // namespace

namespace {

ExperimentConfig from_file(const config::KeyValueFile& file) {
  ExperimentConfig c;
  for (const auto& name : file.section_names()) {
    const auto& entries = file.section(name);
    if (name == "env") read_env(entries, c);
    else if (name == "reward") read_reward(entries, c.reward);
    else if (name == "termination") read_termination(entries, c.termination);
    else if (name == "model") read_model(entries, c.model);
    else if (name == "train") read_train(entries, c.train);
    else if (name == "eval") read_eval(entries, c.eval);
    else if (name.empty() && !entries.empty()) config::unknown_key("", entries.front());
    else if (!name.empty()) throw ConfigError("unknown section [" + name + "]");
  }
  c.model.net.image_rows = c.bounds.image_rows;
  c.model.net.image_cols = c.bounds.image_cols;
  c.validate();
  return c;
}

}  // namespace

ExperimentConfig parse_experiment(std::string_view text) {
  return from_file(config::KeyValueFile::parse(text));
}

ExperimentConfig load_experiment(const std::string& path) {
  return from_file(config::KeyValueFile::load(path));
}

std::string to_config_text(const ExperimentConfig& c) {
  using config::format_double;
  auto b = [](bool v) { return v ? "true" : "false"; };
  std::ostringstream o;
  o << "[env]\n"
    << "width_mm = " << format_double(c.bounds.width_mm) << '\n'
    << "height_mm = " << format_double(c.bounds.height_mm) << '\n'
    << "image_depth_mm = " << format_double(c.bounds.image_depth_mm) << '\n'
    << "image_width_mm = " << format_double(c.bounds.image_width_mm) << '\n'
    << "image_rows = " << c.bounds.image_rows << '\n'
    << "image_cols = " << c.bounds.image_cols << '\n'
    << "radius_min_mm = " << format_double(c.ranges.radius_min_mm) << '\n'
    << "radius_max_mm = " << format_double(c.ranges.radius_max_mm) << '\n'
    << "depth_min_mm = " << format_double(c.ranges.depth_min_mm) << '\n'
    << "depth_max_mm = " << format_double(c.ranges.depth_max_mm) << '\n'
    << "anchor_fraction = " << format_double(c.ranges.anchor_fraction) << '\n'
    << "train_seed_base = " << c.train_seed_base << '\n'
    << "heldout_seed_base = " << c.heldout_seed_base << '\n'
    << "flip_rate = " << format_double(c.train_noise.flip_rate) << '\n'
    << "erode = " << b(c.train_noise.erode) << "\n\n";
  o << "[reward]\n"
    << "mu_dis = " << format_double(c.reward.mu_dis) << '\n'
    << "mu_ves = " << format_double(c.reward.mu_ves) << '\n'
    << "D_th_px_at_256 = " << format_double(c.reward.D_th_px_at_256) << '\n'
    << "near_goal = " << format_double(c.reward.near_goal) << '\n'
    << "goal = " << format_double(c.reward.goal) << '\n'
    << "no_vessel_penalty = " << format_double(c.reward.no_vessel_penalty) << '\n'
    << "near_reward = " << format_double(c.reward.near_reward) << '\n'
    << "goal_reward = " << format_double(c.reward.goal_reward) << "\n\n";
  o << "[termination]\n"
    << "ratio_bound = " << format_double(c.termination.ratio_bound) << '\n'
    << "height_threshold_px_at_256 = " << format_double(c.termination.height_threshold_px_at_256)
    << '\n'
    << "width_fraction = " << format_double(c.termination.width_fraction) << "\n\n";
  o << "[model]\n"
    << "features_per_image = " << c.model.net.features_per_image << '\n'
    << "buffer_size = " << c.model.net.buffer_size << '\n'
    << "hidden = " << c.model.net.hidden << '\n'
    << "use_lstm = " << b(c.model.net.use_lstm) << '\n'
    << "zero_area_deltas = " << b(c.model.flags.zero_area_deltas) << "\n\n";
  o << "[train]\n"
    << "episodes = " << c.train.episodes << '\n'
    << "max_steps = " << c.train.max_steps << '\n'
    << "update_every = " << c.train.update_every << '\n'
    << "gamma = " << format_double(c.train.gamma) << '\n'
    << "lr_schedule = " << format_lr_schedule(c.train.lr_schedule) << '\n'
    << "entropy_coef = " << format_double(c.train.entropy_coef) << '\n'
    << "critic_coef = " << format_double(c.train.critic_coef) << '\n'
    << "n_envs = " << c.train.n_envs << '\n'
    << "seed = " << c.train.seed << '\n'
    << "normalize_advantages = " << b(c.train.normalize_advantages) << '\n'
    << "max_grad_norm = " << format_double(c.train.max_grad_norm) << '\n'
    << "checkpoint_every = " << c.train.checkpoint_every << "\n\n";
  o << "[eval]\n"
    << "n_envs = " << c.eval.n_envs << '\n'
    << "episodes = " << c.eval.episodes << '\n'
    << "max_steps = " << c.eval.max_steps << '\n'
    << "seed = " << c.eval.seed << '\n'
    << "flip_rate = " << format_double(c.eval.flip_rate) << '\n'
    << "erode = " << b(c.eval.erode) << '\n';
  return o.str();
}

ExperimentConfig apply_ablation(const ExperimentConfig& base, std::string_view name) {
  ExperimentConfig c = base;
  if (name == "no_lstm") {
    c.model.net.use_lstm = false;
  } else if (name == "no_area_changes") {
    c.model.flags.zero_area_deltas = true;
  } else if (name == "no_history") {
    c.model.net.buffer_size = 1;
  } else if (name == "buffer_8") {
    c.model.net.buffer_size = 8;
  } else if (name != kFullModel) {
    throw ConfigError("unknown ablation '" + std::string(name) +
                      "' (expected full, no_lstm, no_area_changes, no_history or buffer_8)");
  }
  return c;
}

std::vector<AblationVariant> ablation_grid(const ExperimentConfig& base) {
  std::vector<AblationVariant> grid;
  for (std::string_view name : {kFullModel, std::string_view("no_lstm"),
                                std::string_view("no_area_changes"),
                                std::string_view("no_history"), std::string_view("buffer_8")}) {
    grid.push_back({std::string(name), apply_ablation(base, name)});
  }
  return grid;
}

}  // namespace vesnav::eval
