// Copyright 2026 The DeepClean Authors
// SPDX-License-Identifier: Apache-2.0

#include "distortion.hpp"

#include <cmath>

namespace deepclean {

namespace {
constexpr std::array<std::string_view, kNumKinds> kKindNames = {"clean", "underexposed", "overexposed",
                                                                "noise_low", "noise_high"};
}

DistortionKind kind_from_index(int index) {
  require(index >= 0 && index < kNumKinds, "distortion kind index out of range: " + std::to_string(index));
  return static_cast<DistortionKind>(index);
}

std::string_view kind_name(DistortionKind k) noexcept { return kKindNames[kind_index(k)]; }

DistortionKind parse_kind(std::string_view name) {
  for (int i = 0; i < kNumKinds; ++i)
    if (kKindNames[i] == name) return static_cast<DistortionKind>(i);
  fail(ErrorCode::InvalidArgument, "unknown distortion kind: " + std::string(name));
}

void DistortionSpec::validate() const {
  if (kind == DistortionKind::Clean) fail(ErrorCode::InvalidArgument, "a distortion spec cannot be Clean");
  if (!std::isfinite(param)) fail(ErrorCode::InvalidArgument, "distortion parameter must be finite");
  if (is_exposure(kind) && !(param > 0.0)) fail(ErrorCode::InvalidArgument, "gamma must be > 0");
  if (is_noise(kind) && param < 0.0) fail(ErrorCode::InvalidArgument, "sigma must be >= 0");
}

ImageU8 apply_gamma(const ImageU8& img, double gamma, double gain) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) fail(ErrorCode::InvalidArgument, "gamma must be > 0");
  std::array<std::uint8_t, 256> lut{};
  for (int v = 0; v < 256; ++v) lut[v] = unit_to_byte(gain * std::pow(v / 255.0, gamma));
  ImageU8 out(img.height(), img.width(), img.channels());
  auto src = img.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = lut[src[i]];
  return out;
}

ImageU8 add_noise_field(const ImageU8& img, std::span<const double> noise) {
  if (noise.size() != img.size()) fail(ErrorCode::DimensionMismatch, "noise field size does not match image");
  ImageU8 out(img.height(), img.width(), img.channels());
  auto src = img.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = unit_to_byte(src[i] / 255.0 + noise[i]);
  return out;
}

ImageU8 apply_gaussian_noise(const ImageU8& img, double mean, double sigma, Rng& rng) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) fail(ErrorCode::InvalidArgument, "sigma must be >= 0");
  if (sigma == 0.0 && mean == 0.0) return img;
  std::vector<double> noise(img.size());
  if (sigma == 0.0) {
    std::fill(noise.begin(), noise.end(), mean);
  } else {
    std::normal_distribution<double> dist(mean, sigma);
    for (auto& n : noise) n = dist(rng);
  }
  return add_noise_field(img, noise);
}

ImageU8 apply_spec(const ImageU8& img, const DistortionSpec& spec, Rng& rng) {
  spec.validate();
  if (is_exposure(spec.kind)) return apply_gamma(img, spec.param, 1.0);
  return apply_gaussian_noise(img, 0.0, spec.param, rng);
}

ImageU8 apply_sequence(const ImageU8& img, std::span<const DistortionSpec> seq, Rng& rng) {
  ImageU8 current = img;
  for (const auto& spec : seq) current = apply_spec(current, spec, rng);
  return current;
}

DistortionKind latest_label(std::span<const DistortionSpec> seq) noexcept {
  return seq.empty() ? DistortionKind::Clean : seq.back().kind;
}

DistortionKind classify_gamma(double gamma) {
  if (!(gamma > 0.0)) fail(ErrorCode::InvalidArgument, "gamma must be > 0");
  if (gamma == 1.0) fail(ErrorCode::InvalidArgument, "gamma = 1 is not a distortion");
  return gamma > 1.0 ? DistortionKind::Underexposed : DistortionKind::Overexposed;
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view id) noexcept {
  // FNV-1a over the id, then a splitmix64 finalizer mixed with the seed.
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : id) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (h | 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace deepclean
