// Copyright 2026 The DeepClean Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "imaging.hpp"

namespace deepclean {

/// Five-way label space. The numeric order is the canonical head/checkpoint order.
enum class DistortionKind : int {
  Clean = 0,
  Underexposed = 1,
  Overexposed = 2,
  NoiseLow = 3,
  NoiseHigh = 4,
};

inline constexpr int kNumKinds = 5;
inline constexpr std::array<DistortionKind, kNumKinds> kAllKinds = {
    DistortionKind::Clean, DistortionKind::Underexposed, DistortionKind::Overexposed, DistortionKind::NoiseLow,
    DistortionKind::NoiseHigh};

constexpr int kind_index(DistortionKind k) noexcept { return static_cast<int>(k); }
DistortionKind kind_from_index(int index);

std::string_view kind_name(DistortionKind k) noexcept;
DistortionKind parse_kind(std::string_view name);

constexpr bool is_exposure(DistortionKind k) noexcept {
  return k == DistortionKind::Underexposed || k == DistortionKind::Overexposed;
}
constexpr bool is_noise(DistortionKind k) noexcept {
  return k == DistortionKind::NoiseLow || k == DistortionKind::NoiseHigh;
}

/// One corruption event. `param` is gamma for exposure kinds and sigma for noise kinds.
struct DistortionSpec {
  DistortionKind kind = DistortionKind::Underexposed;
  double param = 1.0;

  void validate() const;
  friend bool operator==(const DistortionSpec&, const DistortionSpec&) = default;
};

using Rng = std::mt19937_64;

/// Power-law exposure change: 255 * gain * (p / 255)^gamma, clamped and rounded.
ImageU8 apply_gamma(const ImageU8& img, double gamma, double gain = 1.0);

/// Additive Gaussian noise in the unit domain, one independent draw per sample.
ImageU8 apply_gaussian_noise(const ImageU8& img, double mean, double sigma, Rng& rng);

/// Adds an explicit unit-domain noise field (one value per sample) and clamps.
ImageU8 add_noise_field(const ImageU8& img, std::span<const double> noise);

ImageU8 apply_spec(const ImageU8& img, const DistortionSpec& spec, Rng& rng);

/// Left fold of the specs over the image; the noise mean is always zero here.
ImageU8 apply_sequence(const ImageU8& img, std::span<const DistortionSpec> seq, Rng& rng);

/// Label of the most recent distortion, Clean for an empty sequence.
DistortionKind latest_label(std::span<const DistortionSpec> seq) noexcept;

/// gamma > 1 darkens (Underexposed), gamma < 1 brightens (Overexposed).
DistortionKind classify_gamma(double gamma);

/// Stable 64-bit stream seed for a (global seed, identifier) pair.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view id) noexcept;

}  // namespace deepclean
