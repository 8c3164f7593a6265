// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <random>
#include <span>
#include <vector>

#include "vesnav/nn/actor_critic.hpp"
#include "vesnav/sim/vessel_sim.hpp"

namespace vesnav::agent {

enum class SelectMode { kSample, kGreedy };

struct ActionChoice {
  sim::Action action = sim::Action::kPlusX;
  double log_prob = 0.0;
};

// Throws NumericError on non-finite logits. Greedy ties go to the lowest index.
ActionChoice select_action(std::span<const double> logits, SelectMode mode, std::mt19937_64& rng);

struct RolloutStep {
  std::array<double, nn::kActionCount> logits{};
  sim::Action action = sim::Action::kPlusX;
  double reward = 0.0;  // reward received after taking `action`
  double value = 0.0;   // critic estimate of the state the action was taken in
  double log_prob = 0.0;
};

struct RolloutSegment {
  std::vector<RolloutStep> steps;
  double bootstrap_value = 0.0;  // forced to zero when terminal
  bool terminal = false;
};

struct Advantages {
  std::vector<double> returns;     // n-step returns R_t
  std::vector<double> advantages;  // psi_t = R_t - V(s_t)
};

// n shrinks toward the segment end, so every step bootstraps from the same final value.
Advantages n_step_advantage(const RolloutSegment& segment, double gamma);

struct LossTerms {
  double actor = 0.0;    // -sum log pi(a|s) * psi
  double critic = 0.0;   // sum (R - V)^2, before the coefficient
  double entropy = 0.0;  // sum H(pi(.|s))
  double total = 0.0;    // actor + critic_coef * critic - entropy_coef * entropy
};

struct LossResult {
  LossTerms terms;
  std::vector<nn::StepGrad> grads;  // d total / d (logits, value), per step
};

// Advantages and returns enter as constants; no gradient flows through them.
LossResult a2c_loss(const RolloutSegment& segment, const Advantages& adv, double entropy_coef,
                    double critic_coef);

// Scales advantages to zero mean, unit variance (optional stabilization).
void normalize_advantages(Advantages& adv);

}  // namespace vesnav::agent
