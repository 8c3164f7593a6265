// SPDX-License-Identifier: Apache-2.0
#include "vesnav/eval/runner.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "vesnav/common.hpp"

namespace vesnav::eval {
namespace fs = std::filesystem;

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace

agent::Trainer train_run(const ExperimentConfig& cfg, const std::string& dir, bool resume,
                         std::FILE* progress) {
  cfg.validate();
  const fs::path root(dir);
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw IoError("cannot create " + dir + ": " + ec.message());

  const auto config_path = root / "config.ini";
  const auto ckpt = (root / "checkpoint.bin").string();
  const auto log_path = root / "train_log.jsonl";
  const std::string config_text = to_config_text(cfg);

  agent::Trainer trainer(cfg.train, cfg.model, cfg.training_environments(), cfg.reward,
                         cfg.termination, cfg.train_noise);
  auto mode = std::ios::binary | std::ios::out;
  if (resume && fs::exists(ckpt)) {
    if (!fs::exists(config_path) || read_text(config_path) != config_text) {
      throw ConfigError("run directory " + dir + " was written for a different config");
    }
    trainer.load_checkpoint(ckpt);
    mode |= std::ios::app;
    if (progress) std::fprintf(progress, "resuming at episode %d\n", trainer.episode());
  }
  write_text(config_path, config_text);

  std::ofstream log(log_path, mode);
  if (!log) throw IoError("cannot write " + log_path.string());
  const auto t0 = std::chrono::steady_clock::now();
  while (trainer.episode() < cfg.train.episodes) {
    const auto rec = trainer.train_episode();
    log << agent::to_json_line(rec) << '\n';
    if (trainer.episode() % cfg.train.checkpoint_every == 0 ||
        trainer.episode() == cfg.train.episodes) {
      log.flush();
      trainer.save_checkpoint(ckpt);
      if (progress) {
        const double sec =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::fprintf(progress, "episode %5d  steps %3d  return %8.3f  %s  (%.0f s)\n",
                     trainer.episode(), rec.steps, rec.ret, rec.success ? "success" : "capped ",
                     sec);
        std::fflush(progress);
      }
    }
  }
  if (!log) throw IoError("write failed: " + log_path.string());
  if (cfg.train.episodes == 0) trainer.save_checkpoint(ckpt);
  return trainer;
}

std::vector<AblationRow> run_ablation(const ExperimentConfig& base, const std::string& root,
                                      bool resume, std::FILE* progress) {
  const auto envs = base.heldout_environments();
  const auto settings = base.episode_settings();
  std::vector<AblationRow> rows;
  for (const auto& variant : ablation_grid(base)) {
    if (progress) std::fprintf(progress, "== %s\n", variant.name.c_str());
    auto trainer = train_run(variant.config, (fs::path(root) / variant.name).string(), resume,
                             progress);
    agent::NetworkPolicy policy(trainer.net(), agent::SelectMode::kGreedy,
                                variant.config.model.flags);
    rows.push_back({variant.name,
                    evaluate(policy, envs, base.eval.episodes, settings, base.eval.seed).summary});
  }
  agent::RandomPolicy random;
  rows.push_back(
      {"random", evaluate(random, envs, base.eval.episodes, settings, base.eval.seed).summary});
  return rows;
}

}  // namespace vesnav::eval
