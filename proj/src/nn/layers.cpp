// SPDX-License-Identifier: Apache-2.0
#include "vesnav/nn/layers.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "vesnav/common.hpp"

namespace vesnav::nn {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;
using VecMap = Eigen::Map<Eigen::VectorXd>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

ConstMatMap as_matrix(const Tensor& t, int rows, int cols) {
  return ConstMatMap(t.data(), rows, cols);
}
MatMap as_matrix(Tensor& t, int rows, int cols) { return MatMap(t.data(), rows, cols); }
ConstVecMap as_vector(std::span<const double> s) {
  return ConstVecMap(s.data(), static_cast<Eigen::Index>(s.size()));
}
VecMap as_vector(std::span<double> s) {
  return VecMap(s.data(), static_cast<Eigen::Index>(s.size()));
}

void check_size(std::span<const double> s, std::size_t n, const char* what) {
  if (s.size() != n) {
    throw DimensionError(std::string(what) + ": expected " + std::to_string(n) + " values, got " +
                         std::to_string(s.size()));
  }
}

}  // namespace

DenseLayer DenseLayer::create(ParameterSet& params, const std::string& name, int in, int out) {
  DenseLayer l;
  l.in = in;
  l.out = out;
  l.w = params.add(name + ".w", {out, in});
  l.b = params.add(name + ".b", {out});
  return l;
}

void DenseLayer::forward(const ParameterSet& params, std::span<const double> x,
                         std::span<double> y) const {
  check_size(x, in, "dense input");
  check_size(y, out, "dense output");
  as_vector(y) = as_matrix(params[w].value, out, in) * as_vector(x) +
                 as_vector(params[b].value.span());
}

void DenseLayer::backward(ParameterSet& params, std::span<const double> x,
                          std::span<const double> dy, std::span<double> dx) const {
  const auto dyv = as_vector(dy);
  as_matrix(params[w].grad, out, in).noalias() += dyv * as_vector(x).transpose();
  as_vector(params[b].grad.span()) += dyv;
  if (!dx.empty()) {
    as_vector(dx).noalias() = as_matrix(params[w].value, out, in).transpose() * dyv;
  }
}

Conv2dLayer Conv2dLayer::create(ParameterSet& params, const std::string& name, int in_c,
                                int out_c) {
  Conv2dLayer l;
  l.in_c = in_c;
  l.out_c = out_c;
  l.w = params.add(name + ".w", {out_c, in_c, kKernel, kKernel});
  l.b = params.add(name + ".b", {out_c});
  return l;
}

void Conv2dLayer::forward(const ParameterSet& params, std::span<const double> in, int height,
                          int width, std::vector<double>& cols, std::span<double> out) const {
  check_size(in, static_cast<std::size_t>(in_c) * height * width, "conv input");
  const int oh = out_size(height);
  const int ow = out_size(width);
  const int patch = in_c * kKernel * kKernel;
  const int spatial = oh * ow;
  check_size(out, static_cast<std::size_t>(out_c) * spatial, "conv output");
  cols.assign(static_cast<std::size_t>(patch) * spatial, 0.0);
  for (int c = 0; c < in_c; ++c) {
    for (int ky = 0; ky < kKernel; ++ky) {
      for (int kx = 0; kx < kKernel; ++kx) {
        double* row = cols.data() + static_cast<std::size_t>((c * kKernel + ky) * kKernel + kx) *
                                        spatial;
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * kStride - kPad + ky;
          if (iy < 0 || iy >= height) continue;
          const double* src = in.data() + (static_cast<std::size_t>(c) * height + iy) * width;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * kStride - kPad + kx;
            if (ix >= 0 && ix < width) row[oy * ow + ox] = src[ix];
          }
        }
      }
    }
  }
  MatMap o(out.data(), out_c, spatial);
  o.noalias() = as_matrix(params[w].value, out_c, patch) * ConstMatMap(cols.data(), patch, spatial);
  o.colwise() += as_vector(params[b].value.span());
}

void Conv2dLayer::backward(ParameterSet& params, const std::vector<double>& cols, int height,
                           int width, std::span<const double> dout, std::span<double> din) const {
  const int oh = out_size(height);
  const int ow = out_size(width);
  const int patch = in_c * kKernel * kKernel;
  const int spatial = oh * ow;
  ConstMatMap d(dout.data(), out_c, spatial);
  const ConstMatMap c(cols.data(), patch, spatial);
  as_matrix(params[w].grad, out_c, patch).noalias() += d * c.transpose();
  as_vector(params[b].grad.span()) += d.rowwise().sum();
  if (din.empty()) return;
  RowMat dcols = as_matrix(params[w].value, out_c, patch).transpose() * d;
  std::fill(din.begin(), din.end(), 0.0);
  for (int ch = 0; ch < in_c; ++ch) {
    for (int ky = 0; ky < kKernel; ++ky) {
      for (int kx = 0; kx < kKernel; ++kx) {
        const double* row = dcols.data() +
                            static_cast<std::size_t>((ch * kKernel + ky) * kKernel + kx) * spatial;
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * kStride - kPad + ky;
          if (iy < 0 || iy >= height) continue;
          double* dst = din.data() + (static_cast<std::size_t>(ch) * height + iy) * width;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * kStride - kPad + kx;
            if (ix >= 0 && ix < width) dst[ix] += row[oy * ow + ox];
          }
        }
      }
    }
  }
}

LstmCell LstmCell::create(ParameterSet& params, const std::string& name, int in, int hidden) {
  LstmCell l;
  l.in = in;
  l.hidden = hidden;
  l.wx = params.add(name + ".wx", {4 * hidden, in});
  l.wh = params.add(name + ".wh", {4 * hidden, hidden});
  l.b = params.add(name + ".b", {4 * hidden});
  return l;
}

void LstmCell::forward(const ParameterSet& params, std::span<const double> x,
                       std::span<const double> h, std::span<const double> c, Cache& cache,
                       std::span<double> h_out, std::span<double> c_out) const {
  check_size(x, in, "lstm input");
  check_size(h, hidden, "lstm hidden state");
  check_size(c, hidden, "lstm cell state");
  const int H = hidden;
  Eigen::VectorXd z = as_matrix(params[wx].value, 4 * H, in) * as_vector(x) +
                      as_matrix(params[wh].value, 4 * H, H) * as_vector(h) +
                      as_vector(params[b].value.span());
  cache.x.assign(x.begin(), x.end());
  cache.h_prev.assign(h.begin(), h.end());
  cache.c_prev.assign(c.begin(), c.end());
  cache.i.resize(H);
  cache.f.resize(H);
  cache.g.resize(H);
  cache.o.resize(H);
  cache.c.resize(H);
  cache.tanh_c.resize(H);
  for (int k = 0; k < H; ++k) {
    cache.i[k] = sigmoid(z[k]);
    cache.f[k] = sigmoid(z[H + k]);
    cache.g[k] = std::tanh(z[2 * H + k]);
    cache.o[k] = sigmoid(z[3 * H + k]);
    cache.c[k] = cache.f[k] * c[k] + cache.i[k] * cache.g[k];
    cache.tanh_c[k] = std::tanh(cache.c[k]);
    c_out[k] = cache.c[k];
    h_out[k] = cache.o[k] * cache.tanh_c[k];
  }
}

void LstmCell::backward(ParameterSet& params, const Cache& cache, std::span<const double> dh,
                        std::span<const double> dc, std::span<double> dx,
                        std::span<double> dh_prev, std::span<double> dc_prev) const {
  const int H = hidden;
  Eigen::VectorXd dz(4 * H);
  for (int k = 0; k < H; ++k) {
    const double dct = dc[k] + dh[k] * cache.o[k] * (1.0 - cache.tanh_c[k] * cache.tanh_c[k]);
    const double d_o = dh[k] * cache.tanh_c[k];
    const double d_i = dct * cache.g[k];
    const double d_g = dct * cache.i[k];
    const double d_f = dct * cache.c_prev[k];
    if (!dc_prev.empty()) dc_prev[k] = dct * cache.f[k];
    dz[k] = d_i * cache.i[k] * (1.0 - cache.i[k]);
    dz[H + k] = d_f * cache.f[k] * (1.0 - cache.f[k]);
    dz[2 * H + k] = d_g * (1.0 - cache.g[k] * cache.g[k]);
    dz[3 * H + k] = d_o * cache.o[k] * (1.0 - cache.o[k]);
  }
  as_matrix(params[wx].grad, 4 * H, in).noalias() +=
      dz * as_vector(std::span<const double>(cache.x)).transpose();
  as_matrix(params[wh].grad, 4 * H, H).noalias() +=
      dz * as_vector(std::span<const double>(cache.h_prev)).transpose();
  as_vector(params[b].grad.span()) += dz;
  if (!dx.empty()) {
    as_vector(dx).noalias() = as_matrix(params[wx].value, 4 * H, in).transpose() * dz;
  }
  if (!dh_prev.empty()) {
    as_vector(dh_prev).noalias() = as_matrix(params[wh].value, 4 * H, H).transpose() * dz;
  }
}

void relu_inplace(std::span<double> x) {
  for (auto& v : x) v = v > 0.0 ? v : 0.0;
}

void relu_backward(std::span<const double> y, std::span<double> dy) {
  for (std::size_t i = 0; i < dy.size(); ++i) {
    if (!(y[i] > 0.0)) dy[i] = 0.0;
  }
}

void tanh_inplace(std::span<double> x) {
  for (auto& v : x) v = std::tanh(v);
}

void tanh_backward(std::span<const double> y, std::span<double> dy) {
  for (std::size_t i = 0; i < dy.size(); ++i) dy[i] *= 1.0 - y[i] * y[i];
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void global_avg_pool(std::span<const double> in, int channels, int spatial,
                     std::span<double> out) {
  for (int c = 0; c < channels; ++c) {
    double s = 0.0;
    const double* p = in.data() + static_cast<std::size_t>(c) * spatial;
    for (int i = 0; i < spatial; ++i) s += p[i];
    out[c] = s / spatial;
  }
}

void global_avg_pool_backward(std::span<const double> dout, int channels, int spatial,
                              std::span<double> din) {
  for (int c = 0; c < channels; ++c) {
    const double g = dout[c] / spatial;
    double* p = din.data() + static_cast<std::size_t>(c) * spatial;
    std::fill(p, p + spatial, g);
  }
}

std::vector<double> log_softmax(std::span<const double> logits) {
  const double m = *std::max_element(logits.begin(), logits.end());
  double s = 0.0;
  for (double z : logits) s += std::exp(z - m);
  const double lse = m + std::log(s);
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lse;
  return out;
}

std::vector<double> softmax(std::span<const double> logits) {
  auto lp = log_softmax(logits);
  for (auto& v : lp) v = std::exp(v);
  return lp;
}

double entropy_from_log_probs(std::span<const double> log_probs) {
  double h = 0.0;
  for (double lp : log_probs) h -= std::exp(lp) * lp;
  return h;
}

double standard_normal(std::mt19937_64& rng) {
  // Box-Muller on platform-independent uniforms.
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void init_uniform_fan_in(Tensor& t, int fan_in, std::mt19937_64& rng) {
  const double bound = std::sqrt(3.0 / fan_in);
  for (auto& v : t.values) v = uniform(rng, -bound, bound);
}

void init_orthogonal_blocks(Tensor& t, int block, std::mt19937_64& rng) {
  const int rows = t.shape.at(0);
  if (t.shape.size() != 2 || t.shape[1] != block || rows % block != 0) {
    throw DimensionError("orthogonal init expects [k*block, block]");
  }
  for (int blk = 0; blk < rows / block; ++blk) {
    Eigen::MatrixXd a(block, block);
    for (int r = 0; r < block; ++r) {
      for (int c = 0; c < block; ++c) a(r, c) = standard_normal(rng);
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int c = 0; c < block; ++c) {
      if (r(c, c) < 0) q.col(c) *= -1.0;
    }
    for (int r2 = 0; r2 < block; ++r2) {
      for (int c = 0; c < block; ++c) {
        t.values[static_cast<std::size_t>(blk * block + r2) * block + c] = q(r2, c);
      }
    }
  }
}

}  // namespace vesnav::nn
