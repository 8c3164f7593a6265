// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace vesnav::nn {

struct Tensor {
  std::vector<int> shape;
  std::vector<double> values;

  Tensor() = default;
  explicit Tensor(std::vector<int> shape_, double fill = 0.0)
      : shape(std::move(shape_)), values(element_count(shape), fill) {}

  static std::size_t element_count(const std::vector<int>& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                           [](std::size_t a, int b) { return a * static_cast<std::size_t>(b); });
  }

  std::size_t size() const { return values.size(); }
  double* data() { return values.data(); }
  const double* data() const { return values.data(); }
  std::span<double> span() { return values; }
  std::span<const double> span() const { return values; }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }

  bool consistent() const { return element_count(shape) == values.size(); }
  bool all_finite() const;
  void fill(double v) { std::fill(values.begin(), values.end(), v); }

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
};

// Named parameters with matching gradient slots. Indices stay valid for the
// lifetime of the set; the version counter changes whenever values change.
class ParameterSet {
 public:
  std::size_t add(const std::string& name, std::vector<int> shape);

  Parameter& operator[](std::size_t i) { return params_[i]; }
  const Parameter& operator[](std::size_t i) const { return params_[i]; }
  std::size_t size() const { return params_.size(); }
  std::vector<Parameter>& all() { return params_; }
  const std::vector<Parameter>& all() const { return params_; }

  // Returns size() when the name is unknown.
  std::size_t find(const std::string& name) const;
  Parameter& get(const std::string& name);
  const Parameter& get(const std::string& name) const;

  std::size_t parameter_count() const;
  void zero_grad();
  bool grads_finite() const;
  double grad_norm() const;

  std::uint64_t version() const { return version_; }
  void touch() { ++version_; }

 private:
  std::vector<Parameter> params_;
  std::uint64_t version_ = 0;
};

}  // namespace vesnav::nn
