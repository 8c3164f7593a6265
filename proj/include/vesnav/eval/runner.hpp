// SPDX-License-Identifier: Apache-2.0
//
// Training runs on disk. A run directory holds:
//   config.ini        the experiment the run belongs to
//   train_log.jsonl   one line per episode
//   checkpoint.bin    trainer state after the last saved episode
#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include "vesnav/agent/trainer.hpp"
#include "vesnav/eval/evaluate.hpp"
#include "vesnav/eval/experiment.hpp"

namespace vesnav::eval {

// Trains until cfg.train.episodes. With `resume`, continues from the directory's
// checkpoint; a directory written for a different config raises ConfigError.
// Progress lines go to `progress` when it is non-null.
agent::Trainer train_run(const ExperimentConfig& cfg, const std::string& dir, bool resume,
                         std::FILE* progress = nullptr);

struct AblationRow {
  std::string name;
  MetricsSummary summary;
};

// Trains (or resumes) every grid variant under root/<name>, evaluates each greedily
// on the shared held-out set, and appends a random-policy row.
std::vector<AblationRow> run_ablation(const ExperimentConfig& base, const std::string& root,
                                      bool resume, std::FILE* progress = nullptr);

}  // namespace vesnav::eval
