// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "vesnav/nn/tensor.hpp"

namespace vesnav::nn {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Adam {
 public:
  explicit Adam(const ParameterSet& params, AdamConfig config = {});

  // Applies one update from the gradient slots. A non-finite gradient rejects
  // the whole update (parameters and moments untouched) and returns false.
  bool step(ParameterSet& params, double lr);

  std::int64_t steps() const { return t_; }
  std::vector<Tensor>& first_moments() { return m_; }
  std::vector<Tensor>& second_moments() { return v_; }
  const std::vector<Tensor>& first_moments() const { return m_; }
  const std::vector<Tensor>& second_moments() const { return v_; }
  void set_steps(std::int64_t t) { t_ = t; }

 private:
  AdamConfig config_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  std::int64_t t_ = 0;
};

// Rescales gradients so their global L2 norm is at most max_norm. Returns the norm before clipping.
double clip_grad_norm(ParameterSet& params, double max_norm);

}  // namespace vesnav::nn
