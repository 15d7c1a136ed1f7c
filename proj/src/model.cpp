// Copyright 2026 The DeepClean Authors
// SPDX-License-Identifier: Apache-2.0

#include "model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "parallel.hpp"

namespace deepclean {

std::string_view arch_name(Arch a) noexcept { return a == Arch::MultiTask ? "mtl" : "hcc"; }

Arch parse_arch(std::string_view name) {
  if (name == "mtl") return Arch::MultiTask;
  if (name == "hcc") return Arch::Classifier;
  fail(ErrorCode::InvalidArgument, "unknown architecture '" + std::string(name) + "' (expected mtl or hcc)");
}

ModelConfig ModelConfig::multitask() { return {}; }

ModelConfig ModelConfig::classifier() {
  ModelConfig c;
  c.arch = Arch::Classifier;
  c.head_dims = {128, 64, 32, 16, kNumKinds};
  return c;
}

void ModelConfig::validate() const {
  require(input_size >= 4, "model input size must be >= 4");
  require(!conv_channels.empty(), "at least one conv block is required");
  for (int c : conv_channels) require(c >= 1, "conv channel counts must be positive");
  require(head_dims.size() >= 3, "heads need at least two layers before the output");
  require(head_dims.front() == embedding_dim(), "head input width must equal the embedding width");
  for (int d : head_dims) require(d >= 1, "head widths must be positive");
  const int out = arch == Arch::MultiTask ? 1 : kNumKinds;
  require(head_dims.back() == out, "head output width does not match the architecture");
}

DistortionKind predicted_kind(const ForwardOutput& out) noexcept {
  int best = 0;
  for (int k = 1; k < kNumKinds; ++k)
    if (out.head_prob[k] > out.head_prob[best]) best = k;
  return static_cast<DistortionKind>(best);
}

nn::Tensor<float> prepare_input(const ImageU8& img, int input_size) {
  const ImageU8 rgb = to_rgb(resize_bilinear(img, input_size, input_size));
  nn::Tensor<float> t({3, input_size, input_size});
  const std::size_t plane = static_cast<std::size_t>(input_size) * input_size;
  auto src = rgb.data();
  for (std::size_t p = 0; p < plane; ++p)
    for (int c = 0; c < 3; ++c) t[c * plane + p] = static_cast<float>(src[p * 3 + c]) / 127.5f - 1.0f;
  return t;
}

// ---------------------------------------------------------------------------
// Network

template <typename T>
Network<T>::Network(const ModelConfig& config) : config_(config) {
  config_.validate();
  int in_c = 3;
  for (std::size_t b = 0; b < config_.conv_channels.size(); ++b) {
    const int out_c = config_.conv_channels[b];
    const std::string base = "extractor.conv" + std::to_string(b);
    nn::Tensor<T> w({out_c, in_c, 3, 3});
    nn::kaiming_uniform(w, in_c * 9, derive_seed(config_.seed, base + ".weight"));
    params_.emplace_back(base + ".weight", std::move(w));
    params_.emplace_back(base + ".bias", nn::Tensor<T>({out_c}));
    in_c = out_c;
  }
  head_offset_ = params_.size();
  for (int h = 0; h < config_.num_heads(); ++h) {
    const std::string base = config_.arch == Arch::MultiTask
                                 ? "head." + std::string(kind_name(static_cast<DistortionKind>(h)))
                                 : std::string("classifier");
    for (std::size_t l = 0; l + 1 < config_.head_dims.size(); ++l) {
      const int n_in = config_.head_dims[l], n_out = config_.head_dims[l + 1];
      const std::string name = base + ".fc" + std::to_string(l);
      nn::Tensor<T> w({n_out, n_in});
      nn::kaiming_uniform(w, n_in, derive_seed(config_.seed, name + ".weight"));
      params_.emplace_back(name + ".weight", std::move(w));
      params_.emplace_back(name + ".bias", nn::Tensor<T>({n_out}));
    }
  }
}

template <typename T>
nn::ConvGeometry Network<T>::geometry(std::size_t block) const {
  nn::ConvGeometry g;
  g.in_channels = 3;
  g.in_h = g.in_w = config_.input_size;
  for (std::size_t b = 0; b <= block; ++b) {
    if (b > 0) {
      g.in_channels = g.out_channels;
      g.in_h = g.out_h();
      g.in_w = g.out_w();
    }
    g.out_channels = config_.conv_channels[b];
  }
  return g;
}

template <typename T>
void Network<T>::forward(const nn::Tensor<T>& input, Cache& cache) const {
  const std::size_t blocks = config_.conv_channels.size();
  cache.conv_cols.resize(blocks);
  cache.conv_pre.resize(blocks);
  cache.conv_inputs.clear();
  nn::Tensor<T> act = input;
  for (std::size_t b = 0; b < blocks; ++b) {
    const auto g = geometry(b);
    nn::conv2d_forward(act, params_[2 * b].value, params_[2 * b + 1].value, g, cache.conv_pre[b], cache.conv_cols[b]);
    act = cache.conv_pre[b];
    nn::leaky_relu_forward(act.data());
  }
  cache.embedding.assign(static_cast<std::size_t>(config_.embedding_dim()), T{});
  nn::global_avg_pool_forward(act, std::span<T>(cache.embedding));

  const int heads = config_.num_heads();
  const std::size_t layers = config_.head_dims.size() - 1;
  cache.head_inputs.assign(heads, {});
  cache.head_pre.assign(heads, {});
  cache.logits.assign(heads, {});
  for (int h = 0; h < heads; ++h) {
    std::vector<T> x = cache.embedding;
    for (std::size_t l = 0; l < layers; ++l) {
      const auto& w = params_[head_offset_ + 2 * (h * layers + l)].value;
      const auto& bias = params_[head_offset_ + 2 * (h * layers + l) + 1].value;
      std::vector<T> z(static_cast<std::size_t>(config_.head_dims[l + 1]));
      nn::dense_forward<T>(x, w, bias, z);
      cache.head_inputs[h].push_back(std::move(x));
      cache.head_pre[h].push_back(z);
      if (l + 1 < layers) nn::leaky_relu_forward<T>(z);
      x = std::move(z);
    }
    cache.logits[h] = std::move(x);
  }
}

template <typename T>
void Network<T>::backward(const Cache& cache, const std::vector<std::vector<T>>& grad_logits,
                          std::vector<nn::Tensor<T>>& grads, nn::Tensor<T>* grad_input) const {
  const int heads = config_.num_heads();
  const std::size_t layers = config_.head_dims.size() - 1;
  std::vector<T> grad_embedding(cache.embedding.size(), T{});
  for (int h = 0; h < heads; ++h) {
    std::vector<T> g = grad_logits[h];
    for (std::size_t l = layers; l-- > 0;) {
      if (l + 1 < layers) nn::leaky_relu_backward<T>(cache.head_pre[h][l], g);
      const std::size_t pi = head_offset_ + 2 * (h * layers + l);
      std::vector<T> gin(cache.head_inputs[h][l].size());
      nn::dense_backward<T>(cache.head_inputs[h][l], params_[pi].value, g, grads[pi], grads[pi + 1], gin);
      g = std::move(gin);
    }
    for (std::size_t i = 0; i < g.size(); ++i) grad_embedding[i] += g[i];
  }

  const std::size_t blocks = config_.conv_channels.size();
  const auto last = geometry(blocks - 1);
  nn::Tensor<T> grad_act;
  nn::global_avg_pool_backward<T>(grad_embedding, last.out_channels, last.out_h(), last.out_w(), grad_act);
  for (std::size_t b = blocks; b-- > 0;) {
    nn::leaky_relu_backward<T>(cache.conv_pre[b].data(), grad_act.data());
    nn::Tensor<T> grad_in;
    const bool need_input = b > 0 || grad_input != nullptr;
    nn::conv2d_backward(cache.conv_cols[b], params_[2 * b].value, grad_act, geometry(b), grads[2 * b],
                        grads[2 * b + 1], need_input ? &grad_in : nullptr);
    if (b == 0) {
      if (grad_input) *grad_input = std::move(grad_in);
    } else {
      grad_act = std::move(grad_in);
    }
  }
}

template <typename T>
std::vector<bool> Network<T>::activation_pattern(const Cache& cache) {
  std::vector<bool> signs;
  for (const auto& pre : cache.conv_pre)
    for (T v : pre.data()) signs.push_back(v > T{});
  for (const auto& head : cache.head_pre)
    for (std::size_t l = 0; l + 1 < head.size(); ++l)
      for (T v : head[l]) signs.push_back(v > T{});
  return signs;
}

template <typename T>
std::vector<nn::Tensor<T>> Network<T>::zero_grads() const {
  std::vector<nn::Tensor<T>> g;
  g.reserve(params_.size());
  for (const auto& p : params_) g.emplace_back(p.value.shape());
  return g;
}

template <typename T>
template <typename U>
void Network<T>::copy_values_from(const Network<U>& other) {
  require(other.params().size() == params_.size(), "parameter layouts differ");
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const auto src = other.params()[i].value.data();
    auto dst = params_[i].value.data();
    require(src.size() == dst.size(), "parameter shapes differ");
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] = static_cast<T>(src[j]);
  }
}

template class Network<float>;
template class Network<double>;
template void Network<double>::copy_values_from<float>(const Network<float>&);
template void Network<float>::copy_values_from<double>(const Network<double>&);

// ---------------------------------------------------------------------------
// DistortionModel

DistortionModel::DistortionModel(const ModelConfig& config) : net_(config) {}

ForwardOutput DistortionModel::analyze(const ImageU8& img) const {
  return analyze_prepared(prepare_input(img, config().input_size));
}

ForwardOutput DistortionModel::analyze_prepared(const nn::Tensor<float>& input) const {
  Network<float>::Cache cache;
  net_.forward(input, cache);
  ForwardOutput out;
  out.embedding = cache.embedding;
  if (arch() == Arch::MultiTask) {
    for (int k = 0; k < kNumKinds; ++k) {
      out.head_hidden[k] = cache.head_inputs[k][Network<float>::kFeatureLayer + 1];
      out.head_prob[k] = nn::sigmoid(cache.logits[k][0]);
    }
  } else {
    const std::vector<double> logits(cache.logits[0].begin(), cache.logits[0].end());
    const auto p = nn::softmax(logits);
    std::copy(p.begin(), p.end(), out.head_prob.begin());
  }
  return out;
}

double sample_loss(Arch arch, const std::vector<std::vector<double>>& logits, DistortionKind label,
                   std::vector<std::vector<double>>& grad_logits) {
  grad_logits.assign(logits.size(), {});
  if (arch == Arch::MultiTask) {
    double loss = 0.0;
    for (int k = 0; k < kNumKinds; ++k) {
      const auto r = nn::sigmoid_bce(logits[k][0], k == kind_index(label) ? 1 : 0);
      loss += r.loss;
      grad_logits[k] = {r.grad};
    }
    return loss;
  }
  grad_logits[0].assign(logits[0].size(), 0.0);
  return nn::softmax_cross_entropy(logits[0], kind_index(label), grad_logits[0]);
}

double DistortionModel::training_loss(const ImageU8& img, DistortionKind label) const {
  Network<float>::Cache cache;
  net_.forward(prepare_input(img, config().input_size), cache);
  std::vector<std::vector<double>> logits, grads;
  for (const auto& l : cache.logits) logits.emplace_back(l.begin(), l.end());
  return sample_loss(arch(), logits, label, grads);
}

TrainingLog DistortionModel::train(std::span<const LabeledImage> samples, const TrainOptions& options,
                                   const std::function<void(const EpochStats&)>& on_epoch) {
  require(!samples.empty(), "training set is empty");
  require(options.epochs >= 0, "epochs must be >= 0");
  require(options.batch_size >= 1, "batch size must be >= 1");
  require(options.lr > 0.0, "learning rate must be > 0");
  require(options.final_lr >= 0.0, "final learning rate must be >= 0");
  require(options.weight_decay >= 0.0, "weight decay must be >= 0");

  TrainingLog log;
  if (options.epochs == 0) return log;

  const int size = config().input_size;
  std::vector<ImageU8> inputs(samples.size());
  parallel_for(samples.size(), options.threads, [&](std::size_t i) {
    inputs[i] = to_rgb(resize_bilinear(samples[i].image, size, size));
  });

  struct Slot {
    std::vector<nn::Tensor<float>> grads;
    double loss = 0.0;
    bool correct = false;
  };
  const auto batch = static_cast<std::size_t>(options.batch_size);
  std::vector<Slot> slots(std::min(batch, samples.size()));
  for (auto& s : slots) s.grads = net_.zero_grads();

  nn::AdamConfig adam;
  adam.lr = options.lr;
  adam.weight_decay = options.weight_decay;

  Rng shuffle_rng(derive_seed(options.seed, "train/shuffle"));
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::int64_t step = 0;
  auto& params = net_.params();
  const std::size_t batches_per_epoch = (samples.size() + batch - 1) / batch;
  const double total_steps = static_cast<double>(batches_per_epoch) * options.epochs;
  auto lr_at = [&](std::int64_t s) {
    if (options.final_lr <= 0.0 || total_steps <= 1.0) return options.lr;
    const double t = static_cast<double>(s - 1) / (total_steps - 1.0);
    return options.final_lr + 0.5 * (options.lr - options.final_lr) * (1.0 + std::cos(std::numbers::pi * t));
  };

  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t n = std::min(batch, order.size() - start);
      parallel_for(n, options.threads, [&](std::size_t j) {
        Slot& slot = slots[j];
        for (auto& g : slot.grads) g.fill(0.0f);
        const auto& sample = samples[order[start + j]];
        Network<float>::Cache cache;
        net_.forward(prepare_input(inputs[order[start + j]], size), cache);
        std::vector<std::vector<double>> logits, grad_logits;
        for (const auto& l : cache.logits) logits.emplace_back(l.begin(), l.end());
        slot.loss = sample_loss(arch(), logits, sample.label, grad_logits);

        ForwardOutput probe;
        if (arch() == Arch::MultiTask) {
          for (int k = 0; k < kNumKinds; ++k) probe.head_prob[k] = logits[k][0];
        } else {
          std::copy(logits[0].begin(), logits[0].end(), probe.head_prob.begin());
        }
        slot.correct = predicted_kind(probe) == sample.label;

        std::vector<std::vector<float>> gl(grad_logits.size());
        for (std::size_t h = 0; h < gl.size(); ++h)
          for (double v : grad_logits[h]) gl[h].push_back(static_cast<float>(v / static_cast<double>(n)));
        net_.backward(cache, gl, slot.grads, nullptr);
      });
      for (std::size_t j = 0; j < n; ++j) {
        loss_sum += slots[j].loss;
        correct += slots[j].correct ? 1 : 0;
        for (std::size_t p = 0; p < params.size(); ++p) {
          auto dst = params[p].grad.data();
          auto src = slots[j].grads[p].data();
          for (std::size_t e = 0; e < dst.size(); ++e) dst[e] += src[e];
        }
      }
      ++step;
      adam.lr = lr_at(step);
      nn::adam_step<float>(params, adam, step);
    }
    EpochStats stats{epoch, loss_sum / static_cast<double>(samples.size()),
                     static_cast<double>(correct) / static_cast<double>(samples.size())};
    log.push_back(stats);
    if (on_epoch) on_epoch(stats);
  }
  return log;
}

std::vector<LabeledImage> load_labeled(const Manifest& manifest, int threads) {
  std::vector<LabeledImage> out(manifest.size());
  parallel_for(manifest.size(), threads, [&](std::size_t i) {
    out[i] = {load_image(manifest[i].distorted_path), manifest[i].label};
  });
  return out;
}

double identify_accuracy(const FeatureModel& model, std::span<const LabeledImage> samples, int threads) {
  if (samples.empty()) return 0.0;
  std::vector<char> hit(samples.size(), 0);
  parallel_for(samples.size(), threads, [&](std::size_t i) {
    hit[i] = predicted_kind(model.analyze(samples[i].image)) == samples[i].label;
  });
  return static_cast<double>(std::count(hit.begin(), hit.end(), 1)) / static_cast<double>(samples.size());
}

double identify_accuracy(const FeatureModel& model, const Manifest& manifest, int threads) {
  const auto samples = load_labeled(manifest, threads);
  return identify_accuracy(model, samples, threads);
}

}  // namespace deepclean
