// SPDX-License-Identifier: Apache-2.0
//
// Layer kernels. Each layer references its parameters by index into a
// ParameterSet; forward writes outputs, backward accumulates into the gradient
// slots and optionally writes the input gradient.
#pragma once

#include <array>
#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "vesnav/nn/tensor.hpp"

namespace vesnav::nn {

struct DenseLayer {
  std::size_t w = 0;  // [out, in]
  std::size_t b = 0;  // [out]
  int in = 0;
  int out = 0;

  static DenseLayer create(ParameterSet& params, const std::string& name, int in, int out);
  void forward(const ParameterSet& params, std::span<const double> x, std::span<double> y) const;
  void backward(ParameterSet& params, std::span<const double> x, std::span<const double> dy,
                std::span<double> dx) const;
};

// 3x3 convolution with stride 2 and zero padding 1, via im2col.
struct Conv2dLayer {
  std::size_t w = 0;  // [out_c, in_c, 3, 3]
  std::size_t b = 0;  // [out_c]
  int in_c = 0;
  int out_c = 0;
  static constexpr int kKernel = 3;
  static constexpr int kStride = 2;
  static constexpr int kPad = 1;

  static Conv2dLayer create(ParameterSet& params, const std::string& name, int in_c, int out_c);
  static int out_size(int in) { return (in + 2 * kPad - kKernel) / kStride + 1; }

  // `cols` receives the im2col matrix, kept for backward.
  void forward(const ParameterSet& params, std::span<const double> in, int height, int width,
               std::vector<double>& cols, std::span<double> out) const;
  // `din` may be empty when the input gradient is not needed.
  void backward(ParameterSet& params, const std::vector<double>& cols, int height, int width,
                std::span<const double> dout, std::span<double> din) const;
};

struct LstmCell {
  std::size_t wx = 0;  // [4H, in], gate rows ordered input, forget, candidate, output
  std::size_t wh = 0;  // [4H, H]
  std::size_t b = 0;   // [4H]
  int in = 0;
  int hidden = 0;

  struct Cache {
    std::vector<double> x, h_prev, c_prev;
    std::vector<double> i, f, g, o, c, tanh_c;
  };

  static LstmCell create(ParameterSet& params, const std::string& name, int in, int hidden);
  void forward(const ParameterSet& params, std::span<const double> x, std::span<const double> h,
               std::span<const double> c, Cache& cache, std::span<double> h_out,
               std::span<double> c_out) const;
  void backward(ParameterSet& params, const Cache& cache, std::span<const double> dh,
                std::span<const double> dc, std::span<double> dx, std::span<double> dh_prev,
                std::span<double> dc_prev) const;
};

void relu_inplace(std::span<double> x);
// dy *= (y > 0), where y is the ReLU output.
void relu_backward(std::span<const double> y, std::span<double> dy);
void tanh_inplace(std::span<double> x);
void tanh_backward(std::span<const double> y, std::span<double> dy);
double sigmoid(double x);

// Mean over each channel of a [C, H, W] map.
void global_avg_pool(std::span<const double> in, int channels, int spatial, std::span<double> out);
void global_avg_pool_backward(std::span<const double> dout, int channels, int spatial,
                              std::span<double> din);

std::vector<double> log_softmax(std::span<const double> logits);
std::vector<double> softmax(std::span<const double> logits);
double entropy_from_log_probs(std::span<const double> log_probs);

// Initializers.
void init_uniform_fan_in(Tensor& t, int fan_in, std::mt19937_64& rng);
// Square orthogonal blocks of size `block` stacked along the rows.
void init_orthogonal_blocks(Tensor& t, int block, std::mt19937_64& rng);
double standard_normal(std::mt19937_64& rng);

}  // namespace vesnav::nn
