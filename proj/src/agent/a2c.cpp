// SPDX-License-Identifier: Apache-2.0
#include "vesnav/agent/a2c.hpp"

#include <cmath>

#include "vesnav/common.hpp"
#include "vesnav/nn/layers.hpp"

namespace vesnav::agent {

ActionChoice select_action(std::span<const double> logits, SelectMode mode,
                           std::mt19937_64& rng) {
  if (logits.size() != static_cast<std::size_t>(nn::kActionCount)) {
    throw DimensionError("expected 6 logits");
  }
  for (double z : logits) {
    if (!std::isfinite(z)) throw NumericError("non-finite action logit");
  }
  const auto log_probs = nn::log_softmax(logits);
  int chosen = 0;
  if (mode == SelectMode::kGreedy) {
    for (int i = 1; i < nn::kActionCount; ++i) {
      if (logits[i] > logits[chosen]) chosen = i;
    }
  } else {
    const double u = uniform01(rng);
    double cum = 0.0;
    chosen = nn::kActionCount - 1;
    for (int i = 0; i < nn::kActionCount; ++i) {
      cum += std::exp(log_probs[i]);
      if (u < cum) {
        chosen = i;
        break;
      }
    }
  }
  return {sim::action_from_index(chosen), log_probs[chosen]};
}

Advantages n_step_advantage(const RolloutSegment& segment, double gamma) {
  const std::size_t n = segment.steps.size();
  Advantages out;
  out.returns.resize(n);
  out.advantages.resize(n);
  double running = segment.terminal ? 0.0 : segment.bootstrap_value;
  for (std::size_t t = n; t-- > 0;) {
    running = segment.steps[t].reward + gamma * running;
    out.returns[t] = running;
    out.advantages[t] = running - segment.steps[t].value;
  }
  return out;
}

LossResult a2c_loss(const RolloutSegment& segment, const Advantages& adv, double entropy_coef,
                    double critic_coef) {
  LossResult out;
  out.grads.resize(segment.steps.size());
  for (std::size_t t = 0; t < segment.steps.size(); ++t) {
    const auto& step = segment.steps[t];
    const auto log_probs = nn::log_softmax(step.logits);
    const double entropy = nn::entropy_from_log_probs(log_probs);
    const int a = static_cast<int>(step.action);
    const double psi = adv.advantages[t];
    const double err = adv.returns[t] - step.value;

    out.terms.actor += -log_probs[a] * psi;
    out.terms.critic += err * err;
    out.terms.entropy += entropy;

    auto& g = out.grads[t];
    for (int j = 0; j < nn::kActionCount; ++j) {
      const double p = std::exp(log_probs[j]);
      // d(-log pi_a)/dz_j = p_j - [j == a];  d(-H)/dz_j = p_j (log p_j + H)
      g.dlogits[j] = psi * (p - (j == a ? 1.0 : 0.0)) + entropy_coef * p * (log_probs[j] + entropy);
    }
    g.dvalue = -2.0 * critic_coef * err;
  }
  out.terms.total =
      out.terms.actor + critic_coef * out.terms.critic - entropy_coef * out.terms.entropy;
  return out;
}

void normalize_advantages(Advantages& adv) {
  const std::size_t n = adv.advantages.size();
  if (n < 2) return;
  double mean = 0.0;
  for (double a : adv.advantages) mean += a;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double a : adv.advantages) var += (a - mean) * (a - mean);
  const double sd = std::sqrt(var / static_cast<double>(n));
  for (double& a : adv.advantages) a = (a - mean) / (sd + 1e-8);
}

}  // namespace vesnav::agent
