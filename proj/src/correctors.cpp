// Copyright 2026 The DeepClean Authors
// SPDX-License-Identifier: Apache-2.0

#include "correctors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace deepclean {

namespace {

std::string format_param(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  std::string s = buf;
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

double parse_double(std::string_view text, std::string_view what) {
  const std::string s(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (...) {
    used = 0;
  }
  if (used != s.size() || s.empty()) fail(ErrorCode::InvalidArgument, "bad " + std::string(what) + ": " + s);
  return v;
}

}  // namespace

bool CorrectionAlgorithm::targets_kind(DistortionKind k) const noexcept {
  return std::find(targets.begin(), targets.end(), k) != targets.end();
}

AlgorithmPool& AlgorithmPool::register_algorithm(CorrectionAlgorithm alg) {
  require(!alg.name.empty(), "corrector name must not be empty");
  if (find(alg.name)) fail(ErrorCode::InvalidArgument, "duplicate corrector name: " + alg.name);
  require(!alg.targets.empty(), "corrector " + alg.name + " must target at least one kind");
  require(!alg.targets_kind(DistortionKind::Clean), "corrector " + alg.name + " cannot target Clean");
  require(static_cast<bool>(alg.apply), "corrector " + alg.name + " has no apply function");
  algorithms_.push_back(std::move(alg));
  return *this;
}

std::vector<const CorrectionAlgorithm*> AlgorithmPool::candidates_for(DistortionKind kind) const {
  require(kind != DistortionKind::Clean, "Clean has no correction candidates");
  std::vector<const CorrectionAlgorithm*> out;
  for (const auto& a : algorithms_)
    if (a.targets_kind(kind)) out.push_back(&a);
  return out;
}

const CorrectionAlgorithm* AlgorithmPool::find(std::string_view name) const noexcept {
  for (const auto& a : algorithms_)
    if (a.name == name) return &a;
  return nullptr;
}

const CorrectionAlgorithm& AlgorithmPool::at(std::string_view name) const {
  if (const auto* a = find(name)) return *a;
  fail(ErrorCode::InvalidArgument, "corrector not in pool: " + std::string(name));
}

bool AlgorithmPool::covers_all_kinds(std::size_t min_per_kind) const {
  for (DistortionKind k : kAllKinds) {
    if (k == DistortionKind::Clean) continue;
    if (candidates_for(k).size() < min_per_kind) return false;
  }
  return true;
}

CorrectionAlgorithm gamma_corrector(double gamma) {
  if (!(gamma > 0.0) || gamma == 1.0 || !std::isfinite(gamma))
    fail(ErrorCode::InvalidArgument, "corrector gamma must be > 0 and != 1");
  const DistortionKind target = gamma < 1.0 ? DistortionKind::Underexposed : DistortionKind::Overexposed;
  return {"gamma_" + format_param(gamma), {target},
          [gamma](const ImageU8& img) { return apply_gamma(img, gamma, 1.0); }};
}

int reflect_index(int i, int n) noexcept {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

std::vector<double> gaussian_kernel(double sigma) {
  require(sigma > 0.0 && std::isfinite(sigma), "blur sigma must be > 0");
  const int half = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * half + 1);
  double sum = 0.0;
  for (int i = -half; i <= half; ++i) sum += k[i + half] = std::exp(-0.5 * i * i / (sigma * sigma));
  for (auto& w : k) w /= sum;
  return k;
}

ImageU8 gaussian_blur(const ImageU8& img, double sigma) {
  const auto k = gaussian_kernel(sigma);
  const int half = static_cast<int>(k.size() / 2);
  const int h = img.height(), w = img.width(), c = img.channels();
  std::vector<double> tmp(img.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int ch = 0; ch < c; ++ch) {
        double acc = 0.0;
        for (int t = -half; t <= half; ++t) acc += k[t + half] * img.at(y, reflect_index(x + t, w), ch);
        tmp[(static_cast<std::size_t>(y) * w + x) * c + ch] = acc;
      }
  ImageU8 out(h, w, c);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int ch = 0; ch < c; ++ch) {
        double acc = 0.0;
        for (int t = -half; t <= half; ++t)
          acc += k[t + half] * tmp[(static_cast<std::size_t>(reflect_index(y + t, h)) * w + x) * c + ch];
        out.at(y, x, ch) = static_cast<std::uint8_t>(std::clamp(std::round(acc), 0.0, 255.0));
      }
  return out;
}

ImageU8 median_filter(const ImageU8& img, int window) {
  require(window == 3 || window == 5, "median window must be 3 or 5");
  const int half = window / 2;
  const int h = img.height(), w = img.width(), c = img.channels();
  ImageU8 out(h, w, c);
  std::vector<std::uint8_t> buf(static_cast<std::size_t>(window) * window);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int ch = 0; ch < c; ++ch) {
        std::size_t n = 0;
        for (int dy = -half; dy <= half; ++dy)
          for (int dx = -half; dx <= half; ++dx)
            buf[n++] = img.at(reflect_index(y + dy, h), reflect_index(x + dx, w), ch);
        std::nth_element(buf.begin(), buf.begin() + n / 2, buf.end());
        out.at(y, x, ch) = buf[n / 2];
      }
  return out;
}

CorrectionAlgorithm gaussian_blur_denoiser(double radius_sigma) {
  require(radius_sigma > 0.0 && std::isfinite(radius_sigma), "blur sigma must be > 0");
  return {"blur_" + format_param(radius_sigma), {DistortionKind::NoiseLow, DistortionKind::NoiseHigh},
          [radius_sigma](const ImageU8& img) { return gaussian_blur(img, radius_sigma); }};
}

CorrectionAlgorithm median_denoiser(int window) {
  require(window == 3 || window == 5, "median window must be 3 or 5");
  return {"median_" + std::to_string(window), {DistortionKind::NoiseLow, DistortionKind::NoiseHigh},
          [window](const ImageU8& img) { return median_filter(img, window); }};
}

CorrectionAlgorithm make_corrector(std::string_view name) {
  const auto us = name.find('_');
  if (us == std::string_view::npos) fail(ErrorCode::InvalidArgument, "unknown corrector: " + std::string(name));
  const auto family = name.substr(0, us);
  const auto arg = name.substr(us + 1);
  if (family == "gamma") return gamma_corrector(parse_double(arg, "gamma"));
  if (family == "blur") return gaussian_blur_denoiser(parse_double(arg, "blur sigma"));
  if (family == "median") {
    int window = 0;
    const auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), window);
    if (ec != std::errc{} || ptr != arg.data() + arg.size())
      fail(ErrorCode::InvalidArgument, "bad median window: " + std::string(arg));
    return median_denoiser(window);
  }
  fail(ErrorCode::InvalidArgument, "unknown corrector family: " + std::string(name));
}

AlgorithmPool make_pool(std::string_view names) {
  AlgorithmPool pool;
  std::size_t start = 0;
  while (start <= names.size()) {
    auto end = names.find(',', start);
    if (end == std::string_view::npos) end = names.size();
    auto token = names.substr(start, end - start);
    while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
    while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
    if (!token.empty()) pool.register_algorithm(make_corrector(token));
    start = end + 1;
  }
  require(pool.size() > 0, "corrector pool is empty");
  return pool;
}

AlgorithmPool default_pool() { return make_pool(kDefaultPoolNames); }

}  // namespace deepclean
