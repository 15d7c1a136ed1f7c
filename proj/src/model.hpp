// Copyright 2026 The DeepClean Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "distortion.hpp"
#include "imaging.hpp"
#include "nn/layers.hpp"

namespace deepclean {

enum class Arch {
  MultiTask,   // shared extractor + one binary head per kind
  Classifier,  // shared extractor + one softmax head (hard-coded-classifier baseline)
};

std::string_view arch_name(Arch a) noexcept;
Arch parse_arch(std::string_view name);

struct ModelConfig {
  Arch arch = Arch::MultiTask;
  int input_size = 64;
  std::vector<int> conv_channels{16, 32, 64, 128};
  /// Layer widths of each head, starting at the embedding width.
  std::vector<int> head_dims{128, 64, 64, 1};
  std::uint64_t seed = 42;

  static ModelConfig multitask();
  static ModelConfig classifier();
  int embedding_dim() const noexcept { return conv_channels.back(); }
  int num_heads() const noexcept { return arch == Arch::MultiTask ? kNumKinds : 1; }
  void validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Everything a forward pass exposes to the planner. For the classifier
/// architecture `head_prob` holds the softmax and `head_hidden` is empty.
struct ForwardOutput {
  std::vector<float> embedding;
  std::array<std::vector<float>, kNumKinds> head_hidden;
  std::array<double, kNumKinds> head_prob{};
};

/// Anything that can score an image; the planner and the strategies only
/// depend on this, so tests can substitute stubs.
class FeatureModel {
 public:
  virtual ~FeatureModel() = default;
  virtual ForwardOutput analyze(const ImageU8& img) const = 0;
};

/// Argmax over head probabilities; lowest canonical index wins ties.
DistortionKind predicted_kind(const ForwardOutput& out) noexcept;

/// RGB, resized to input_size, CHW, scaled to [-1, 1].
nn::Tensor<float> prepare_input(const ImageU8& img, int input_size);

/// The network proper, generic in its scalar type so gradient checks can run
/// in double precision against the float production path.
template <typename T>
class Network {
 public:
  struct Cache {
    std::vector<nn::Tensor<T>> conv_inputs;   // input to each conv block
    std::vector<nn::AlignedVector<T>> conv_cols;    // im2col buffers
    std::vector<nn::Tensor<T>> conv_pre;      // pre-activation conv outputs
    std::vector<T> embedding;
    // [head][layer] inputs and pre-activations
    std::vector<std::vector<std::vector<T>>> head_inputs;
    std::vector<std::vector<std::vector<T>>> head_pre;
    std::vector<std::vector<T>> logits;       // [head][out]
  };

  /// Sign of every leaky-relu pre-activation in a forward pass.
  static std::vector<bool> activation_pattern(const Cache& cache);

  explicit Network(const ModelConfig& config);

  const ModelConfig& config() const noexcept { return config_; }
  std::vector<nn::Parameter<T>>& params() noexcept { return params_; }
  const std::vector<nn::Parameter<T>>& params() const noexcept { return params_; }

  void forward(const nn::Tensor<T>& input, Cache& cache) const;

  /// Back-propagates per-head logit gradients, accumulating into `grads`
  /// (one tensor per parameter). Writes the input gradient when non-null.
  void backward(const Cache& cache, const std::vector<std::vector<T>>& grad_logits,
                std::vector<nn::Tensor<T>>& grads, nn::Tensor<T>* grad_input) const;

  /// Activation after the second head layer.
  static constexpr int kFeatureLayer = 1;

  std::vector<nn::Tensor<T>> zero_grads() const;

  template <typename U>
  void copy_values_from(const Network<U>& other);

 private:
  nn::ConvGeometry geometry(std::size_t block) const;

  ModelConfig config_;
  std::vector<nn::Parameter<T>> params_;
  std::size_t head_offset_ = 0;  // index of the first head parameter
};

struct TrainOptions {
  double lr = 1e-4;
  // > 0: cosine decay from lr to final_lr over all steps; otherwise constant
  double final_lr = 0.0;
  double weight_decay = 5e-4;
  int epochs = 10;
  int batch_size = 32;
  std::uint64_t seed = 42;
  int threads = 1;
};

struct EpochStats {
  int epoch = 0;
  double mean_loss = 0.0;
  double train_accuracy = 0.0;
};

using TrainingLog = std::vector<EpochStats>;

struct LabeledImage {
  ImageU8 image;
  DistortionKind label = DistortionKind::Clean;
};

/// Trainable identification model. Forward passes are const and safe for
/// concurrent readers; training requires exclusive access.
class DistortionModel final : public FeatureModel {
 public:
  explicit DistortionModel(const ModelConfig& config = ModelConfig::multitask());

  const ModelConfig& config() const noexcept { return net_.config(); }
  Arch arch() const noexcept { return net_.config().arch; }
  Network<float>& network() noexcept { return net_; }
  const Network<float>& network() const noexcept { return net_; }

  ForwardOutput analyze(const ImageU8& img) const override;
  ForwardOutput analyze_prepared(const nn::Tensor<float>& input) const;

  /// Per-sample objective: summed per-head BCE (multi-task) or softmax
  /// cross-entropy (classifier).
  double training_loss(const ImageU8& img, DistortionKind label) const;

  /// Minibatch Adam. Per-sample gradients are reduced in index order, so the
  /// result does not depend on the thread count. Callbacks receive each epoch.
  TrainingLog train(std::span<const LabeledImage> samples, const TrainOptions& options,
                    const std::function<void(const EpochStats&)>& on_epoch = {});

  void save(const std::filesystem::path& path) const;
  static DistortionModel load(const std::filesystem::path& path);

 private:
  Network<float> net_;
};

/// Loss of one sample given its head logits, with d loss / d logits.
double sample_loss(Arch arch, const std::vector<std::vector<double>>& logits, DistortionKind label,
                   std::vector<std::vector<double>>& grad_logits);

std::vector<LabeledImage> load_labeled(const Manifest& manifest, int threads = 1);

/// Fraction of samples whose predicted kind matches the label.
double identify_accuracy(const FeatureModel& model, std::span<const LabeledImage> samples, int threads = 1);
double identify_accuracy(const FeatureModel& model, const Manifest& manifest, int threads = 1);

}  // namespace deepclean
