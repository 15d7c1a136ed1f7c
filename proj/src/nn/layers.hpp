// Copyright 2026 The DeepClean Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "nn/tensor.hpp"

namespace deepclean::nn {

inline constexpr double kLeakySlope = 0.01;

struct ConvGeometry {
  int in_channels = 0, in_h = 0, in_w = 0;
  int out_channels = 0;
  int kernel = 3, stride = 2, pad = 1;

  int out_h() const noexcept { return (in_h + 2 * pad - kernel) / stride + 1; }
  int out_w() const noexcept { return (in_w + 2 * pad - kernel) / stride + 1; }
  int patch() const noexcept { return in_channels * kernel * kernel; }
};

// Convolution, as im2col + matrix product. `cols` is a [patch, out_h*out_w]
// scratch buffer that forward fills and backward reuses.
template <typename T>
void conv2d_forward(const Tensor<T>& input, const Tensor<T>& weights, const Tensor<T>& bias, const ConvGeometry& g,
                    Tensor<T>& output, AlignedVector<T>& cols);

/// Accumulates into grad_weights/grad_bias; writes grad_input when non-null.
template <typename T>
void conv2d_backward(const AlignedVector<T>& cols, const Tensor<T>& weights, const Tensor<T>& grad_output,
                     const ConvGeometry& g, Tensor<T>& grad_weights, Tensor<T>& grad_bias, Tensor<T>* grad_input);

template <typename T>
void leaky_relu_forward(std::span<T> x, double slope = kLeakySlope);

/// Scales grad by the slope where the pre-activation was negative.
template <typename T>
void leaky_relu_backward(std::span<const T> pre_activation, std::span<T> grad, double slope = kLeakySlope);

/// y = W x + b with W shaped [m, n].
template <typename T>
void dense_forward(std::span<const T> input, const Tensor<T>& weights, const Tensor<T>& bias, std::span<T> output);

template <typename T>
void dense_backward(std::span<const T> input, const Tensor<T>& weights, std::span<const T> grad_output,
                    Tensor<T>& grad_weights, Tensor<T>& grad_bias, std::span<T> grad_input);

template <typename T>
void global_avg_pool_forward(const Tensor<T>& input, std::span<T> output);

template <typename T>
void global_avg_pool_backward(std::span<const T> grad_output, int channels, int h, int w, Tensor<T>& grad_input);

struct LossAndGrad {
  double loss = 0.0;
  double grad = 0.0;
};

/// Binary cross-entropy on a logit, in the overflow-free log-sum-exp form.
LossAndGrad sigmoid_bce(double logit, int label);

double sigmoid(double x) noexcept;

/// Softmax cross-entropy; writes d loss / d logits into grad.
double softmax_cross_entropy(std::span<const double> logits, int label, std::span<double> grad);

std::vector<double> softmax(std::span<const double> logits);

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 5e-4;
};

/// Bias-corrected Adam with L2 decay folded into the gradient; zeroes grads.
template <typename T>
void adam_step(std::span<Parameter<T>> params, const AdamConfig& config, std::int64_t step);

/// Kaiming-uniform fan-in initialization for leaky-ReLU networks.
template <typename T>
void kaiming_uniform(Tensor<T>& weights, int fan_in, std::uint64_t seed);

struct GradCheckOptions {
  double step = 1e-3;
  std::size_t max_coordinates = 64;
  std::uint64_t seed = 7;
  // Optional: signs of every piecewise-linear pre-activation at a point. A
  // coordinate whose +-step probe changes the pattern straddles a kink, where
  // central differences are meaningless; it is skipped and counted.
  std::function<std::vector<bool>(std::span<const double>)> kink_pattern;
  std::size_t* skipped = nullptr;
};

/// Central finite differences of f at x against `analytic`, over up to
/// max_coordinates sampled coordinates. Returns the max of
/// |a - n| / max(|a|, |n|, 1e-8).
double gradient_check(const std::function<double(std::span<const double>)>& f, std::span<const double> x,
                      std::span<const double> analytic, const GradCheckOptions& options = {});

}  // namespace deepclean::nn
