// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "vesnav/nn/tensor.hpp"

namespace vesnav::nn {

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  int samples = 0;
};

// Compares analytic gradients against central differences on `samples`
// parameters drawn round-robin over the tensors (random element within each).
//   analytic: fills the gradient slots (starting from zero) and returns the loss.
//   loss:     returns the loss without touching gradients.
// Relative error is |a - n| / max(1e-8, |a|).
GradCheckResult grad_check(ParameterSet& params, const std::function<double()>& analytic,
                           const std::function<double()>& loss, int samples = 200,
                           double epsilon = 1e-5, std::uint64_t seed = 7);

}  // namespace vesnav::nn
