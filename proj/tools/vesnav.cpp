// SPDX-License-Identifier: Apache-2.0
//
// vesnav: train, evaluate and inspect probe-navigation agents.
//
// Exit codes: 0 success, 2 configuration error, 3 runtime error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "vesnav/agent/episode.hpp"
#include "vesnav/agent/trainer.hpp"
#include "vesnav/common.hpp"
#include "vesnav/config/config.hpp"
#include "vesnav/eval/diagnostics.hpp"
#include "vesnav/eval/evaluate.hpp"
#include "vesnav/eval/experiment.hpp"
#include "vesnav/eval/export.hpp"
#include "vesnav/eval/oracle.hpp"
#include "vesnav/eval/runner.hpp"
#include "vesnav/reward/reward.hpp"

namespace fs = std::filesystem;
using namespace vesnav;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

eval::ExperimentConfig load_or_default(const std::string& path) {
  if (path.empty()) {
    eval::ExperimentConfig cfg;
    cfg.validate();
    return cfg;
  }
  return eval::load_experiment(path);
}

void print_summary(const std::string& label, const eval::MetricsSummary& s) {
  std::printf("%-16s success %6.2f%%  steps %6.2f  pos %.3f +- %.3f mm  ori %.2f +- %.2f deg  (n=%d)\n",
              label.c_str(), 100.0 * s.success_rate, s.mean_steps, s.position_error_mean_mm,
              s.position_error_std_mm, s.orientation_error_mean_deg, s.orientation_error_std_deg,
              s.n_samples);
}

int cmd_train(const std::string& config_path, const std::string& ablation, const std::string& out,
              bool resume) {
  auto cfg = load_or_default(config_path);
  if (!ablation.empty()) cfg = eval::apply_ablation(cfg, ablation);
  const fs::path dir = out.empty() ? fs::path("runs") / (ablation.empty() ? "full" : ablation)
                                   : fs::path(out);
  eval::train_run(cfg, dir.string(), resume, stdout);
  std::printf("wrote %s and %s\n", (dir / "train_log.jsonl").c_str(),
              (dir / "checkpoint.bin").c_str());
  return 0;
}

int cmd_eval(const std::string& config_path, const std::string& checkpoint,
             const std::string& policy_name, int episodes, double noise, const std::string& records) {
  auto cfg = load_or_default(config_path);
  if (noise >= 0.0) cfg.eval.flip_rate = noise;
  if (episodes > 0) cfg.eval.episodes = episodes;
  cfg.validate();
  const auto envs = cfg.heldout_environments();
  const auto settings = cfg.episode_settings();

  std::unique_ptr<agent::LoadedModel> loaded;
  std::unique_ptr<agent::Policy> policy;
  if (policy_name == "network") {
    if (checkpoint.empty()) throw ConfigError("eval with the network policy needs --checkpoint");
    loaded = std::make_unique<agent::LoadedModel>(agent::load_model(checkpoint));
    policy = std::make_unique<agent::NetworkPolicy>(loaded->net, agent::SelectMode::kGreedy,
                                                    loaded->model.flags);
  } else if (policy_name == "random") {
    policy = std::make_unique<agent::RandomPolicy>();
  } else if (policy_name == "oracle") {
    policy = std::make_unique<eval::ScriptedPolicy>();
  } else {
    throw ConfigError("unknown policy '" + policy_name + "' (network, random or oracle)");
  }
  const auto result = eval::evaluate(*policy, envs, cfg.eval.episodes, settings, cfg.eval.seed);
  print_summary(policy_name, result.summary);
  if (!records.empty()) {
    std::ofstream out(records);
    if (!out) throw IoError("cannot write " + records);
    out << "episode,env_id,seed,success,steps,position_error_mm,orientation_error_deg\n";
    for (std::size_t i = 0; i < result.records.size(); ++i) {
      const auto& r = result.records[i];
      out << i << ',' << r.env_id << ',' << r.seed << ',' << (r.success ? 1 : 0) << ','
          << r.steps << ','
          << (r.position_error_mm ? config::format_double(*r.position_error_mm) : "") << ','
          << (r.orientation_error_deg ? config::format_double(*r.orientation_error_deg) : "")
          << '\n';
    }
  }
  return 0;
}

int cmd_ablate(const std::string& config_path, const std::string& out, bool resume) {
  const auto base = load_or_default(config_path);
  const fs::path root = out.empty() ? fs::path("runs") : fs::path(out);
  const auto rows = eval::run_ablation(base, root.string(), resume, stdout);
  std::printf("\n%-16s %9s %8s %20s %20s\n", "variant", "success", "steps", "position (mm)",
              "orientation (deg)");
  for (const auto& [name, s] : rows) {
    std::printf("%-16s %8.1f%% %8.2f %9.2f +- %-7.2f %9.2f +- %-7.2f\n", name.c_str(),
                100.0 * s.success_rate, s.mean_steps, s.position_error_mean_mm,
                s.position_error_std_mm, s.orientation_error_mean_deg,
                s.orientation_error_std_deg);
  }
  return 0;
}

int cmd_render(const std::string& config_path, const std::string& checkpoint,
               std::uint64_t env_seed, const std::string& out, std::uint64_t start_seed) {
  const auto cfg = load_or_default(config_path);
  const auto loaded = agent::load_model(checkpoint);
  const auto env = sim::generate_environment(env_seed, cfg.bounds, cfg.ranges);
  auto settings = cfg.episode_settings();
  settings.keep_frames = true;
  std::mt19937_64 rng(start_seed);
  const auto start = sim::reset_episode(env, cfg.reward.vessel_threshold_px(cfg.bounds), rng);
  agent::NetworkPolicy policy(loaded.net, agent::SelectMode::kGreedy, loaded.model.flags);
  const auto record = agent::run_episode(policy, env, 0, start,
                                         reward::projected_centerline(env.vessel), settings, rng);
  eval::export_trajectory(record, out);
  std::printf("%s after %d steps; wrote %zu frames to %s\n",
              record.success ? "terminated" : "step cap reached", record.steps,
              record.frames.size(), out.c_str());
  return 0;
}

int cmd_gradcheck(int samples, std::uint64_t seed) {
  constexpr double kTolerance = 1e-4;
  bool ok = true;
  for (const auto& c : eval::run_gradient_checks(samples, seed)) {
    const bool pass = c.result.max_relative_error < kTolerance;
    ok = ok && pass;
    std::printf("%-20s max rel err %.3e  worst %-24s %s\n", c.name.c_str(),
                c.result.max_relative_error, c.result.worst_parameter.c_str(),
                pass ? "ok" : "FAIL");
  }
  const auto mutated = eval::run_mutated_gradient_check(samples, seed);
  std::printf("%-20s max rel err %.3e  (expected large)\n", "mutated", mutated.max_relative_error);
  return ok ? 0 : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vessel probe navigation with recurrent advantage actor-critic"};
  app.require_subcommand(1);

  std::string config_path;
  std::string ablation;
  std::string out;
  bool resume = false;
  auto* train = app.add_subcommand("train", "Train one model variant");
  train->add_option("--config", config_path, "Experiment config file")->check(CLI::ExistingFile);
  train->add_option("--ablation", ablation,
                    "Variant: full, no_lstm, no_area_changes, no_history, buffer_8");
  train->add_option("--out", out, "Output directory (default runs/<variant>)");
  train->add_flag("--resume", resume, "Continue from the checkpoint in the output directory");

  std::string checkpoint;
  std::string policy = "network";
  std::string records;
  int episodes = 0;
  double noise = -1.0;
  auto* ev = app.add_subcommand("eval", "Evaluate a policy on held-out environments");
  ev->add_option("--checkpoint", checkpoint, "Model checkpoint")->check(CLI::ExistingFile);
  ev->add_option("--episodes", episodes, "Number of episodes")->check(CLI::PositiveNumber);
  ev->add_option("--noise", noise, "Salt-and-pepper flip rate")->check(CLI::Range(0.0, 1.0));
  ev->add_option("--config", config_path, "Experiment config file")->check(CLI::ExistingFile);
  ev->add_option("--policy", policy, "network, random or oracle");
  ev->add_option("--records", records, "Write per-episode records to this CSV");

  auto* ablate = app.add_subcommand("ablate", "Train and evaluate every ablation variant");
  ablate->add_option("--config", config_path, "Experiment config file")->check(CLI::ExistingFile);
  ablate->add_option("--out", out, "Root output directory (default runs)");
  ablate->add_flag("--resume", resume, "Continue variants from their checkpoints");

  std::uint64_t env_seed = 0;
  std::uint64_t start_seed = 1;
  auto* render = app.add_subcommand("render", "Export one greedy episode as CSV and PGM frames");
  render->add_option("--checkpoint", checkpoint, "Model checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  render->add_option("--env-seed", env_seed, "Environment seed")->required();
  render->add_option("--out", out, "Output directory")->required();
  render->add_option("--start-seed", start_seed, "Seed for the initial pose");
  render->add_option("--config", config_path, "Experiment config file")->check(CLI::ExistingFile);

  int samples = 200;
  std::uint64_t seed = 7;
  auto* gc = app.add_subcommand("gradcheck", "Finite-difference gradient checks");
  gc->add_option("--samples", samples, "Parameters sampled per check")->check(CLI::PositiveNumber);
  gc->add_option("--seed", seed, "Random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*train) return cmd_train(config_path, ablation, out, resume);
    if (*ev) return cmd_eval(config_path, checkpoint, policy, episodes, noise, records);
    if (*ablate) return cmd_ablate(config_path, out, resume);
    if (*render) return cmd_render(config_path, checkpoint, env_seed, out, start_seed);
    if (*gc) return cmd_gradcheck(samples, seed);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return 0;
}
