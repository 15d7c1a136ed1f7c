// Copyright 2026 The DeepClean Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "correctors.hpp"
#include "dataset.hpp"
#include "planner.hpp"

namespace deepclean {

enum class Strategy { DeepClean, OracleMTL, RandomMTL, HardCodedClassifier, Fixed1, Fixed2 };

inline constexpr std::array<Strategy, 6> kAllStrategies = {Strategy::DeepClean, Strategy::OracleMTL,
                                                           Strategy::RandomMTL, Strategy::HardCodedClassifier,
                                                           Strategy::Fixed1,    Strategy::Fixed2};

/// deepclean, oracle, random, hcc, fixed1, fixed2
std::string_view strategy_name(Strategy s) noexcept;
Strategy parse_strategy(std::string_view name);
std::vector<Strategy> parse_strategy_list(std::string_view names);

/// Corrector the hard-coded classifier maps each kind to; the oracle uses the
/// noise entries as its designated denoisers.
std::string_view designated_corrector(DistortionKind kind);

struct StrategyOutcome {
  ImageU8 restored;
  std::optional<DistortionKind> first_identified;
  std::vector<std::string> applied;
};

/// Classifier identification with the fixed kind -> corrector map, iterated
/// until Clean or max_iters.
StrategyOutcome hcc_strategy(const FeatureModel& classifier, const ImageU8& img, const AlgorithmPool& pool,
                             int max_iters = 4);

/// Multi-task identification with a uniformly drawn candidate per step.
StrategyOutcome random_mtl_strategy(const FeatureModel& model, const ImageU8& img, const AlgorithmPool& pool,
                                    Rng& rng, int max_iters = 4);

/// Ground-truth reverse walk: exact inverse gamma for exposure steps, the
/// designated denoiser for noise steps.
StrategyOutcome oracle_strategy(std::span<const DistortionSpec> sequence, const ImageU8& distorted,
                                const AlgorithmPool& pool);

/// Variant 1: gamma 2.0 then blur 0.8. Variant 2: the reverse. Unconditional.
ImageU8 fixed_pipeline(const ImageU8& img, int variant);

/// Candidate maximizing PSNR against the clean reference; first wins ties.
std::string brute_force_best(const ImageU8& img, const ImageU8& clean_ref,
                             std::span<const CorrectionAlgorithm* const> candidates);

/// (x - lower) / (upper - lower).
double normalized_score(double x, double lower, double upper);

struct StrategyReport {
  Strategy strategy = Strategy::DeepClean;
  double mean_psnr = 0.0;
  std::optional<double> id_accuracy;
  std::optional<double> normalized;
  std::array<double, kNumKinds> per_label_psnr{};
  std::array<std::size_t, kNumKinds> per_label_count{};
  std::size_t n_samples = 0;
};

struct EvalReport {
  std::uint64_t seed = 0;
  std::size_t n_samples = 0;
  double psnr_cap = 0.0;
  double distorted_mean_psnr = 0.0;
  std::vector<StrategyReport> strategies;

  const StrategyReport* find(Strategy s) const noexcept;
};

struct EvalOptions {
  std::uint64_t seed = 42;
  int threads = 1;
  int max_iters = 4;
  /// Per-sample PSNR ceiling applied before averaging; exact restorations
  /// would otherwise contribute +inf.
  double psnr_cap = 60.0;
};

/// Runs each strategy over every sample and scores it against the clean
/// reference. Models may be null when no requested strategy needs them.
EvalReport evaluate(const Manifest& manifest, std::span<const Strategy> strategies, const FeatureModel* mtl,
                    const FeatureModel* hcc, const AlgorithmPool& pool, const EvalOptions& options = {});

std::string report_to_json(const EvalReport& report, int indent = 2);
std::string report_to_csv(const EvalReport& report);

}  // namespace deepclean
