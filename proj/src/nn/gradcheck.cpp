// SPDX-License-Identifier: Apache-2.0
#include "vesnav/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "vesnav/common.hpp"

namespace vesnav::nn {

GradCheckResult grad_check(ParameterSet& params, const std::function<double()>& analytic,
                           const std::function<double()>& loss, int samples, double epsilon,
                           std::uint64_t seed) {
  params.zero_grad();
  analytic();
  std::vector<Tensor> grads;
  for (const auto& p : params.all()) grads.push_back(p.grad);

  std::mt19937_64 rng(seed);
  GradCheckResult result;
  for (int s = 0; s < samples; ++s) {
    const std::size_t ti = static_cast<std::size_t>(s) % params.size();
    auto& p = params[ti];
    const std::size_t k = uniform_index(rng, p.value.size());
    const double saved = p.value[k];
    p.value[k] = saved + epsilon;
    params.touch();
    const double up = loss();
    p.value[k] = saved - epsilon;
    params.touch();
    const double down = loss();
    p.value[k] = saved;
    params.touch();
    const double numeric = (up - down) / (2.0 * epsilon);
    const double a = grads[ti][k];
    const double rel = std::abs(a - numeric) / std::max(1e-8, std::abs(a));
    if (rel > result.max_relative_error || !std::isfinite(rel)) {
      result.max_relative_error = rel;
      result.worst_parameter = p.name + "[" + std::to_string(k) + "]";
    }
    ++result.samples;
  }
  return result;
}

}  // namespace vesnav::nn
