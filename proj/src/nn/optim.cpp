// SPDX-License-Identifier: Apache-2.0
#include "vesnav/nn/optim.hpp"

#include <cmath>

namespace vesnav::nn {

Adam::Adam(const ParameterSet& params, AdamConfig config) : config_(config) {
  for (const auto& p : params.all()) {
    m_.emplace_back(p.value.shape);
    v_.emplace_back(p.value.shape);
  }
}

bool Adam::step(ParameterSet& params, double lr) {
  if (!params.grads_finite()) return false;
  ++t_;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    auto& m = m_[i].values;
    auto& v = v_[i].values;
    for (std::size_t k = 0; k < p.value.size(); ++k) {
      const double g = p.grad[k];
      m[k] = config_.beta1 * m[k] + (1.0 - config_.beta1) * g;
      v[k] = config_.beta2 * v[k] + (1.0 - config_.beta2) * g * g;
      const double m_hat = m[k] / bc1;
      const double v_hat = v[k] / bc2;
      p.value[k] -= lr * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
  }
  params.touch();
  return true;
}

double clip_grad_norm(ParameterSet& params, double max_norm) {
  const double n = params.grad_norm();
  if (max_norm > 0.0 && n > max_norm) {
    const double s = max_norm / n;
    for (auto& p : params.all()) {
      for (auto& g : p.grad.values) g *= s;
    }
  }
  return n;
}

}  // namespace vesnav::nn
