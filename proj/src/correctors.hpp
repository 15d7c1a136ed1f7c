// Copyright 2026 The DeepClean Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "distortion.hpp"

namespace deepclean {

/// A named image-to-image transform and the distortion kinds it rectifies.
struct CorrectionAlgorithm {
  std::string name;
  std::vector<DistortionKind> targets;
  std::function<ImageU8(const ImageU8&)> apply;

  bool targets_kind(DistortionKind k) const noexcept;
};

/// Registration-ordered set of correctors. Order breaks selection ties.
class AlgorithmPool {
 public:
  AlgorithmPool() = default;

  /// Appends; rejects duplicate names, empty targets and Clean targets.
  AlgorithmPool& register_algorithm(CorrectionAlgorithm alg);

  /// Every algorithm that targets `kind`, in registration order.
  std::vector<const CorrectionAlgorithm*> candidates_for(DistortionKind kind) const;

  const CorrectionAlgorithm* find(std::string_view name) const noexcept;
  const CorrectionAlgorithm& at(std::string_view name) const;

  std::size_t size() const noexcept { return algorithms_.size(); }
  const std::vector<CorrectionAlgorithm>& algorithms() const noexcept { return algorithms_; }

  /// True when every non-Clean kind has at least `min_per_kind` candidates.
  bool covers_all_kinds(std::size_t min_per_kind = 2) const;

 private:
  std::vector<CorrectionAlgorithm> algorithms_;
};

/// Power-law corrector named gamma_<g>. gamma < 1 brightens (targets
/// Underexposed), gamma > 1 darkens (targets Overexposed).
CorrectionAlgorithm gamma_corrector(double gamma);

/// Separable Gaussian blur named blur_<sigma>, half-width ceil(3 sigma), reflect padding.
CorrectionAlgorithm gaussian_blur_denoiser(double radius_sigma);

/// Per-channel sliding median named median_<window>, window 3 or 5, reflect padding.
CorrectionAlgorithm median_denoiser(int window);

/// Normalized 1-D Gaussian taps for the blur denoiser.
std::vector<double> gaussian_kernel(double sigma);

ImageU8 gaussian_blur(const ImageU8& img, double sigma);
ImageU8 median_filter(const ImageU8& img, int window);

/// Builds a corrector from its name (gamma_<g>, blur_<s>, median_<w>).
CorrectionAlgorithm make_corrector(std::string_view name);

/// Pool from a comma-separated name list.
AlgorithmPool make_pool(std::string_view names);

/// gamma_0.33, gamma_0.5, gamma_1.25, gamma_5.0, blur_0.8, blur_1.5, median_3, median_5.
AlgorithmPool default_pool();
inline constexpr std::string_view kDefaultPoolNames =
    "gamma_0.33,gamma_0.5,gamma_1.25,gamma_5.0,blur_0.8,blur_1.5,median_3,median_5";

/// Index into [0, n) mirrored about the edges without repeating the edge sample.
int reflect_index(int i, int n) noexcept;

}  // namespace deepclean
