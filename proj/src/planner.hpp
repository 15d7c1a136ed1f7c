// Copyright 2026 The DeepClean Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "correctors.hpp"
#include "model.hpp"

namespace deepclean {

/// dot(a, b) / (|a| |b|); 0 when either vector is all zero.
double cosine_similarity(std::span<const float> a, std::span<const float> b);

DistortionKind identify(const FeatureModel& model, const ImageU8& img);

struct CandidateScore {
  std::string name;
  double cosine = 0.0;
};

struct StepResult {
  DistortionKind identified = DistortionKind::Clean;
  std::vector<CandidateScore> candidate_scores;
  std::optional<std::string> chosen;
  ImageU8 image_after;
  std::optional<double> psnr_vs_reference;
};

enum class Termination { PredictedClean, MaxIters, NoCandidates };
std::string_view termination_name(Termination t) noexcept;

struct PipelineTrace {
  std::vector<StepResult> steps;
  Termination terminated = Termination::PredictedClean;
  int iterations = 0;

  std::size_t corrections() const noexcept;
};

/// Ranks every candidate for `kind` by the cosine between the kind's head
/// feature of the corrected image and of `img`; the smallest score wins and
/// the first-registered candidate wins ties.
StepResult select(const FeatureModel& model, const ImageU8& img, DistortionKind kind, const AlgorithmPool& pool,
                  int threads = 1);

struct PipelineOptions {
  int max_iters = 4;
  int threads = 1;
  const ImageU8* reference = nullptr;  // optional clean image for per-step PSNR
};

struct PipelineResult {
  ImageU8 restored;
  PipelineTrace trace;
};

/// identify -> select -> apply, until the image is predicted clean, no
/// candidate exists, or max_iters steps have been taken.
PipelineResult run_pipeline(const FeatureModel& model, const ImageU8& img, const AlgorithmPool& pool,
                            const PipelineOptions& options = {});

/// Structural checks on a finished trace; returns an empty string when valid.
std::string validate_trace(const PipelineTrace& trace, int max_iters);

std::string trace_to_json(const PipelineTrace& trace, int indent = 2);

}  // namespace deepclean
