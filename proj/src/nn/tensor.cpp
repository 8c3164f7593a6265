// SPDX-License-Identifier: Apache-2.0
#include "vesnav/nn/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "vesnav/common.hpp"

namespace vesnav::nn {

bool Tensor::all_finite() const {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

std::size_t ParameterSet::add(const std::string& name, std::vector<int> shape) {
  if (find(name) != size()) throw DimensionError("duplicate parameter name: " + name);
  Parameter p{name, Tensor(shape), Tensor(shape)};
  params_.push_back(std::move(p));
  ++version_;
  return params_.size() - 1;
}

std::size_t ParameterSet::find(const std::string& name) const {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].name == name) return i;
  }
  return params_.size();
}

Parameter& ParameterSet::get(const std::string& name) {
  const auto i = find(name);
  if (i == size()) throw DimensionError("unknown parameter: " + name);
  return params_[i];
}

const Parameter& ParameterSet::get(const std::string& name) const {
  const auto i = find(name);
  if (i == size()) throw DimensionError("unknown parameter: " + name);
  return params_[i];
}

std::size_t ParameterSet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

void ParameterSet::zero_grad() {
  for (auto& p : params_) p.grad.fill(0.0);
}

bool ParameterSet::grads_finite() const {
  return std::all_of(params_.begin(), params_.end(),
                     [](const Parameter& p) { return p.grad.all_finite(); });
}

double ParameterSet::grad_norm() const {
  double s = 0.0;
  for (const auto& p : params_) {
    for (double g : p.grad.values) s += g * g;
  }
  return std::sqrt(s);
}

}  // namespace vesnav::nn
