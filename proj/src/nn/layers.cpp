// Copyright 2026 The DeepClean Authors
// SPDX-License-Identifier: Apache-2.0

#include "nn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Core>

namespace deepclean::nn {

namespace {

void check_conv_shapes(const ConvGeometry& g, const std::vector<int>& in, const std::vector<int>& w,
                       const std::vector<int>& b) {
  if (in != std::vector<int>{g.in_channels, g.in_h, g.in_w})
    fail(ErrorCode::DimensionMismatch, "conv2d: input shape does not match geometry");
  if (w != std::vector<int>{g.out_channels, g.in_channels, g.kernel, g.kernel})
    fail(ErrorCode::DimensionMismatch, "conv2d: weight shape does not match geometry");
  if (b != std::vector<int>{g.out_channels}) fail(ErrorCode::DimensionMismatch, "conv2d: bias shape mismatch");
  if (g.out_h() < 1 || g.out_w() < 1) fail(ErrorCode::DimensionMismatch, "conv2d: empty output");
}

template <typename T>
void im2col(const Tensor<T>& input, const ConvGeometry& g, AlignedVector<T>& cols) {
  const int oh = g.out_h(), ow = g.out_w(), k = g.kernel;
  const std::size_t plane = static_cast<std::size_t>(oh) * ow;
  cols.assign(static_cast<std::size_t>(g.patch()) * plane, T{});
  const T* src = input.data().data();
  for (int c = 0; c < g.in_channels; ++c)
    for (int ky = 0; ky < k; ++ky)
      for (int kx = 0; kx < k; ++kx) {
        T* row = cols.data() + (static_cast<std::size_t>(c) * k * k + ky * k + kx) * plane;
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * g.stride - g.pad + ky;
          if (iy < 0 || iy >= g.in_h) continue;
          const T* in_row = src + (static_cast<std::size_t>(c) * g.in_h + iy) * g.in_w;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * g.stride - g.pad + kx;
            if (ix >= 0 && ix < g.in_w) row[oy * ow + ox] = in_row[ix];
          }
        }
      }
}

template <typename T>
void col2im(const AlignedVector<T>& cols, const ConvGeometry& g, Tensor<T>& grad_input) {
  const int oh = g.out_h(), ow = g.out_w(), k = g.kernel;
  const std::size_t plane = static_cast<std::size_t>(oh) * ow;
  grad_input = Tensor<T>({g.in_channels, g.in_h, g.in_w});
  T* dst = grad_input.data().data();
  for (int c = 0; c < g.in_channels; ++c)
    for (int ky = 0; ky < k; ++ky)
      for (int kx = 0; kx < k; ++kx) {
        const T* row = cols.data() + (static_cast<std::size_t>(c) * k * k + ky * k + kx) * plane;
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * g.stride - g.pad + ky;
          if (iy < 0 || iy >= g.in_h) continue;
          T* out_row = dst + (static_cast<std::size_t>(c) * g.in_h + iy) * g.in_w;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * g.stride - g.pad + kx;
            if (ix >= 0 && ix < g.in_w) out_row[ix] += row[oy * ow + ox];
          }
        }
      }
}

template <typename T>
T dot(const T* a, const T* b, std::size_t n) {
  T acc{};
#pragma omp simd reduction(+ : acc)
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapMat = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMapMat = Eigen::Map<const RowMat<T>>;

}  // namespace

// Convolutions run as GEMMs over the im2col matrix: [out_channels x patch] * [patch x plane].
template <typename T>
void conv2d_forward(const Tensor<T>& input, const Tensor<T>& weights, const Tensor<T>& bias, const ConvGeometry& g,
                    Tensor<T>& output, AlignedVector<T>& cols) {
  check_conv_shapes(g, input.shape(), weights.shape(), bias.shape());
  im2col(input, g, cols);
  const int oh = g.out_h(), ow = g.out_w(), patch = g.patch();
  const Eigen::Index plane = static_cast<Eigen::Index>(oh) * ow;
  output = Tensor<T>({g.out_channels, oh, ow});
  MapMat<T> y(output.data().data(), g.out_channels, plane);
  ConstMapMat<T> w(weights.data().data(), g.out_channels, patch);
  ConstMapMat<T> x(cols.data(), patch, plane);
  y.noalias() = w * x;
  for (int oc = 0; oc < g.out_channels; ++oc) y.row(oc).array() += bias[oc];
}

template <typename T>
void conv2d_backward(const AlignedVector<T>& cols, const Tensor<T>& weights, const Tensor<T>& grad_output,
                     const ConvGeometry& g, Tensor<T>& grad_weights, Tensor<T>& grad_bias, Tensor<T>* grad_input) {
  const int patch = g.patch();
  const Eigen::Index plane = static_cast<Eigen::Index>(g.out_h()) * g.out_w();
  if (grad_output.size() != static_cast<std::size_t>(g.out_channels * plane))
    fail(ErrorCode::DimensionMismatch, "conv2d backward: grad_output shape mismatch");
  ConstMapMat<T> dy(grad_output.data().data(), g.out_channels, plane);
  ConstMapMat<T> x(cols.data(), patch, plane);
  MapMat<T> gw(grad_weights.data().data(), g.out_channels, patch);
  gw.noalias() += dy * x.transpose();
  for (int oc = 0; oc < g.out_channels; ++oc) grad_bias[oc] += dy.row(oc).sum();
  if (grad_input) {
    AlignedVector<T> dcols(static_cast<std::size_t>(patch * plane));
    MapMat<T> dx(dcols.data(), patch, plane);
    ConstMapMat<T> w(weights.data().data(), g.out_channels, patch);
    dx.noalias() = w.transpose() * dy;
    col2im(dcols, g, *grad_input);
  }
}

template <typename T>
void leaky_relu_forward(std::span<T> x, double slope) {
  const T s = static_cast<T>(slope);
  for (auto& v : x) v = v > T{} ? v : v * s;
}

template <typename T>
void leaky_relu_backward(std::span<const T> pre_activation, std::span<T> grad, double slope) {
  const T s = static_cast<T>(slope);
  for (std::size_t i = 0; i < grad.size(); ++i)
    if (!(pre_activation[i] > T{})) grad[i] *= s;
}

template <typename T>
void dense_forward(std::span<const T> input, const Tensor<T>& weights, const Tensor<T>& bias, std::span<T> output) {
  if (weights.rank() != 2 || static_cast<std::size_t>(weights.dim(1)) != input.size() ||
      static_cast<std::size_t>(weights.dim(0)) != output.size() || bias.size() != output.size())
    fail(ErrorCode::DimensionMismatch, "dense: shape mismatch");
  const std::size_t n = input.size();
  for (std::size_t i = 0; i < output.size(); ++i)
    output[i] = bias[i] + dot(weights.data().data() + i * n, input.data(), n);
}

template <typename T>
void dense_backward(std::span<const T> input, const Tensor<T>& weights, std::span<const T> grad_output,
                    Tensor<T>& grad_weights, Tensor<T>& grad_bias, std::span<T> grad_input) {
  const std::size_t m = grad_output.size(), n = input.size();
  T* gw = grad_weights.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    const T d = grad_output[i];
    grad_bias[i] += d;
    T* row = gw + i * n;
#pragma omp simd
    for (std::size_t j = 0; j < n; ++j) row[j] += d * input[j];
  }
  if (!grad_input.empty()) {
    std::fill(grad_input.begin(), grad_input.end(), T{});
    const T* w = weights.data().data();
    for (std::size_t i = 0; i < m; ++i) {
      const T d = grad_output[i];
      const T* row = w + i * n;
#pragma omp simd
      for (std::size_t j = 0; j < n; ++j) grad_input[j] += d * row[j];
    }
  }
}

template <typename T>
void global_avg_pool_forward(const Tensor<T>& input, std::span<T> output) {
  if (input.rank() != 3 || static_cast<std::size_t>(input.dim(0)) != output.size())
    fail(ErrorCode::DimensionMismatch, "global_avg_pool: shape mismatch");
  const std::size_t plane = static_cast<std::size_t>(input.dim(1)) * input.dim(2);
  for (std::size_t c = 0; c < output.size(); ++c) {
    const T* src = input.data().data() + c * plane;
    T s{};
#pragma omp simd reduction(+ : s)
    for (std::size_t j = 0; j < plane; ++j) s += src[j];
    output[c] = s / static_cast<T>(plane);
  }
}

template <typename T>
void global_avg_pool_backward(std::span<const T> grad_output, int channels, int h, int w, Tensor<T>& grad_input) {
  grad_input = Tensor<T>({channels, h, w});
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  for (int c = 0; c < channels; ++c) {
    const T v = grad_output[c] / static_cast<T>(plane);
    std::fill_n(grad_input.data().data() + c * plane, plane, v);
  }
}

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

LossAndGrad sigmoid_bce(double logit, int label) {
  const double y = label ? 1.0 : 0.0;
  return {std::max(logit, 0.0) - logit * y + std::log1p(std::exp(-std::abs(logit))), sigmoid(logit) - y};
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.begin(), logits.end());
  const double mx = *std::max_element(p.begin(), p.end());
  double sum = 0.0;
  for (auto& v : p) sum += v = std::exp(v - mx);
  for (auto& v : p) v /= sum;
  return p;
}

double softmax_cross_entropy(std::span<const double> logits, int label, std::span<double> grad) {
  require(label >= 0 && static_cast<std::size_t>(label) < logits.size(), "label out of range");
  const auto p = softmax(logits);
  const double mx = *std::max_element(logits.begin(), logits.end());
  double lse = 0.0;
  for (double v : logits) lse += std::exp(v - mx);
  lse = mx + std::log(lse);
  for (std::size_t i = 0; i < p.size(); ++i) grad[i] = p[i] - (static_cast<int>(i) == label ? 1.0 : 0.0);
  return lse - logits[label];
}

template <typename T>
void adam_step(std::span<Parameter<T>> params, const AdamConfig& c, std::int64_t step) {
  require(step >= 1, "adam step count must be >= 1");
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(step));
  for (auto& p : params) {
    auto value = p.value.data();
    auto grad = p.grad.data();
    auto m = p.adam_m.data();
    auto v = p.adam_v.data();
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double g = static_cast<double>(grad[i]) + c.weight_decay * static_cast<double>(value[i]);
      const double mi = c.beta1 * m[i] + (1.0 - c.beta1) * g;
      const double vi = c.beta2 * v[i] + (1.0 - c.beta2) * g * g;
      m[i] = static_cast<T>(mi);
      v[i] = static_cast<T>(vi);
      const double update = c.lr * (mi / bc1) / (std::sqrt(vi / bc2) + c.eps);
      value[i] = static_cast<T>(value[i] - update);
      grad[i] = T{};
    }
  }
}

template <typename T>
void kaiming_uniform(Tensor<T>& weights, int fan_in, std::uint64_t seed) {
  const double gain = std::sqrt(2.0 / (1.0 + kLeakySlope * kLeakySlope));
  const double bound = gain * std::sqrt(3.0 / fan_in);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto& w : weights.data()) w = static_cast<T>(dist(rng));
}

double gradient_check(const std::function<double(std::span<const double>)>& f, std::span<const double> x,
                      std::span<const double> analytic, const GradCheckOptions& options) {
  if (analytic.size() != x.size()) fail(ErrorCode::DimensionMismatch, "gradient_check: gradient size mismatch");
  std::vector<std::size_t> coords(x.size());
  std::iota(coords.begin(), coords.end(), 0);
  if (coords.size() > options.max_coordinates) {
    std::mt19937_64 rng(options.seed);
    std::shuffle(coords.begin(), coords.end(), rng);
    coords.resize(options.max_coordinates);
  }
  std::vector<double> probe(x.begin(), x.end());
  std::vector<bool> pattern;
  if (options.kink_pattern) pattern = options.kink_pattern(probe);
  if (options.skipped) *options.skipped = 0;
  double worst = 0.0;
  for (std::size_t i : coords) {
    const double orig = probe[i];
    probe[i] = orig + options.step;
    const double up = f(probe);
    bool kink = options.kink_pattern && options.kink_pattern(probe) != pattern;
    probe[i] = orig - options.step;
    const double down = f(probe);
    kink = kink || (options.kink_pattern && options.kink_pattern(probe) != pattern);
    probe[i] = orig;
    if (kink) {
      if (options.skipped) ++*options.skipped;
      continue;
    }
    const double numeric = (up - down) / (2.0 * options.step);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-8});
    worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
  }
  return worst;
}

#define DEEPCLEAN_INSTANTIATE(T)                                                                                 \
  template void conv2d_forward<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, const ConvGeometry&,    \
                                  Tensor<T>&, AlignedVector<T>&);                                               \
  template void conv2d_backward<T>(const AlignedVector<T>&, const Tensor<T>&, const Tensor<T>&,                 \
                                   const ConvGeometry&, Tensor<T>&, Tensor<T>&, Tensor<T>*);                    \
  template void leaky_relu_forward<T>(std::span<T>, double);                                                    \
  template void leaky_relu_backward<T>(std::span<const T>, std::span<T>, double);                               \
  template void dense_forward<T>(std::span<const T>, const Tensor<T>&, const Tensor<T>&, std::span<T>);         \
  template void dense_backward<T>(std::span<const T>, const Tensor<T>&, std::span<const T>, Tensor<T>&,         \
                                  Tensor<T>&, std::span<T>);                                                    \
  template void global_avg_pool_forward<T>(const Tensor<T>&, std::span<T>);                                     \
  template void global_avg_pool_backward<T>(std::span<const T>, int, int, int, Tensor<T>&);                     \
  template void adam_step<T>(std::span<Parameter<T>>, const AdamConfig&, std::int64_t);                         \
  template void kaiming_uniform<T>(Tensor<T>&, int, std::uint64_t);

DEEPCLEAN_INSTANTIATE(float)
DEEPCLEAN_INSTANTIATE(double)

#undef DEEPCLEAN_INSTANTIATE

}  // namespace deepclean::nn
