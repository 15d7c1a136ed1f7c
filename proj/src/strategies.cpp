// Copyright 2026 The DeepClean Authors
// SPDX-License-Identifier: Apache-2.0

#include "strategies.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "json.hpp"
#include "parallel.hpp"

namespace deepclean {

namespace {
constexpr std::array<std::string_view, 6> kStrategyNames = {"deepclean", "oracle", "random", "hcc", "fixed1", "fixed2"};
}

std::string_view strategy_name(Strategy s) noexcept { return kStrategyNames[static_cast<int>(s)]; }

Strategy parse_strategy(std::string_view name) {
  for (std::size_t i = 0; i < kStrategyNames.size(); ++i)
    if (kStrategyNames[i] == name) return static_cast<Strategy>(i);
  std::string valid;
  for (auto n : kStrategyNames) valid += (valid.empty() ? "" : ", ") + std::string(n);
  fail(ErrorCode::InvalidArgument, "unknown strategy '" + std::string(name) + "' (valid: " + valid + ")");
}

std::vector<Strategy> parse_strategy_list(std::string_view names) {
  std::vector<Strategy> out;
  std::size_t start = 0;
  while (start <= names.size()) {
    auto end = names.find(',', start);
    if (end == std::string_view::npos) end = names.size();
    auto token = names.substr(start, end - start);
    while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
    while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
    if (!token.empty()) {
      const Strategy s = parse_strategy(token);
      if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
    }
    start = end + 1;
  }
  require(!out.empty(), "no strategies requested");
  return out;
}

std::string_view designated_corrector(DistortionKind kind) {
  switch (kind) {
    case DistortionKind::Underexposed: return "gamma_0.5";
    case DistortionKind::Overexposed: return "gamma_1.25";
    case DistortionKind::NoiseLow: return "blur_0.8";
    case DistortionKind::NoiseHigh: return "blur_1.5";
    case DistortionKind::Clean: break;
  }
  fail(ErrorCode::InvalidArgument, "Clean has no designated corrector");
}

StrategyOutcome hcc_strategy(const FeatureModel& classifier, const ImageU8& img, const AlgorithmPool& pool,
                             int max_iters) {
  require(max_iters >= 1, "max_iters must be >= 1");
  StrategyOutcome out{img, std::nullopt, {}};
  for (int it = 0; it < max_iters; ++it) {
    const DistortionKind kind = identify(classifier, out.restored);
    if (!out.first_identified) out.first_identified = kind;
    if (kind == DistortionKind::Clean) break;
    const auto& alg = pool.at(designated_corrector(kind));
    out.restored = alg.apply(out.restored);
    out.applied.push_back(alg.name);
  }
  return out;
}

StrategyOutcome random_mtl_strategy(const FeatureModel& model, const ImageU8& img, const AlgorithmPool& pool, Rng& rng,
                                    int max_iters) {
  require(max_iters >= 1, "max_iters must be >= 1");
  StrategyOutcome out{img, std::nullopt, {}};
  for (int it = 0; it < max_iters; ++it) {
    const DistortionKind kind = identify(model, out.restored);
    if (!out.first_identified) out.first_identified = kind;
    if (kind == DistortionKind::Clean) break;
    const auto candidates = pool.candidates_for(kind);
    if (candidates.empty()) break;
    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    const auto* alg = candidates[pick(rng)];
    out.restored = alg->apply(out.restored);
    out.applied.push_back(alg->name);
  }
  return out;
}

StrategyOutcome oracle_strategy(std::span<const DistortionSpec> sequence, const ImageU8& distorted,
                                const AlgorithmPool& pool) {
  StrategyOutcome out{distorted, std::nullopt, {}};
  for (auto it = sequence.rbegin(); it != sequence.rend(); ++it) {
    it->validate();
    if (pool.candidates_for(it->kind).empty())
      fail(ErrorCode::InvalidArgument, "pool has no corrector for " + std::string(kind_name(it->kind)));
    if (is_exposure(it->kind)) {
      const auto inverse = gamma_corrector(1.0 / it->param);
      out.restored = inverse.apply(out.restored);
      out.applied.push_back(inverse.name);
    } else {
      const auto& alg = pool.at(designated_corrector(it->kind));
      out.restored = alg.apply(out.restored);
      out.applied.push_back(alg.name);
    }
  }
  return out;
}

ImageU8 fixed_pipeline(const ImageU8& img, int variant) {
  require(variant == 1 || variant == 2, "fixed pipeline variant must be 1 or 2");
  if (variant == 1) return gaussian_blur(apply_gamma(img, 2.0, 1.0), 0.8);
  return apply_gamma(gaussian_blur(img, 0.8), 2.0, 1.0);
}

std::string brute_force_best(const ImageU8& img, const ImageU8& clean_ref,
                             std::span<const CorrectionAlgorithm* const> candidates) {
  require(!candidates.empty(), "brute_force_best: no candidates");
  std::size_t best = 0;
  double best_q = -kPsnrInfinity;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double q = psnr(candidates[i]->apply(img), clean_ref);
    if (q > best_q) {
      best_q = q;
      best = i;
    }
  }
  return candidates[best]->name;
}

double normalized_score(double x, double lower, double upper) {
  if (upper == lower || !std::isfinite(upper) || !std::isfinite(lower))
    fail(ErrorCode::InvalidArgument, "normalized_score: degenerate bounds");
  return (x - lower) / (upper - lower);
}

const StrategyReport* EvalReport::find(Strategy s) const noexcept {
  for (const auto& r : strategies)
    if (r.strategy == s) return &r;
  return nullptr;
}

EvalReport evaluate(const Manifest& manifest, std::span<const Strategy> strategies, const FeatureModel* mtl,
                    const FeatureModel* hcc, const AlgorithmPool& pool, const EvalOptions& options) {
  require(!manifest.empty(), "evaluation manifest is empty");
  require(!strategies.empty(), "no strategies requested");
  auto wants = [&](Strategy s) { return std::find(strategies.begin(), strategies.end(), s) != strategies.end(); };
  if ((wants(Strategy::DeepClean) || wants(Strategy::RandomMTL)) && !mtl)
    fail(ErrorCode::MissingModel, "deepclean and random strategies need a multi-task model");
  if (wants(Strategy::HardCodedClassifier) && !hcc)
    fail(ErrorCode::MissingModel, "hcc strategy needs a classifier model");
  if (wants(Strategy::HardCodedClassifier))
    for (auto k : kAllKinds)
      if (k != DistortionKind::Clean) pool.at(designated_corrector(k));

  struct SampleResult {
    double distorted_psnr = 0.0;
    std::vector<double> psnr;
    std::vector<int> id_hit;  // -1 when not applicable
  };
  const double cap = options.psnr_cap;
  auto capped = [cap](double v) { return std::min(v, cap); };
  std::vector<SampleResult> results(manifest.size());

  parallel_for(manifest.size(), options.threads, [&](std::size_t i) {
    const auto& sample = manifest[i];
    const ImageU8 distorted = load_image(sample.distorted_path);
    const ImageU8 clean = load_image(sample.clean_path);
    if (!distorted.same_shape(clean))
      fail(ErrorCode::DimensionMismatch, "clean reference shape differs for sample " + sample.id);
    SampleResult& r = results[i];
    r.distorted_psnr = capped(psnr(distorted, clean));
    for (Strategy s : strategies) {
      StrategyOutcome o;
      switch (s) {
        case Strategy::DeepClean: {
          PipelineOptions po;
          po.max_iters = options.max_iters;
          auto res = run_pipeline(*mtl, distorted, pool, po);
          o.restored = std::move(res.restored);
          o.first_identified = res.trace.steps.front().identified;
          break;
        }
        case Strategy::OracleMTL:
          o = oracle_strategy(sample.sequence, distorted, pool);
          break;
        case Strategy::RandomMTL: {
          Rng rng(derive_seed(options.seed, "random/" + sample.id));
          o = random_mtl_strategy(*mtl, distorted, pool, rng, options.max_iters);
          break;
        }
        case Strategy::HardCodedClassifier:
          o = hcc_strategy(*hcc, distorted, pool, options.max_iters);
          break;
        case Strategy::Fixed1:
        case Strategy::Fixed2:
          o.restored = fixed_pipeline(distorted, s == Strategy::Fixed1 ? 1 : 2);
          break;
      }
      r.psnr.push_back(capped(psnr(o.restored, clean)));
      r.id_hit.push_back(o.first_identified ? (*o.first_identified == sample.label ? 1 : 0) : -1);
    }
  });

  EvalReport report;
  report.seed = options.seed;
  report.n_samples = manifest.size();
  report.psnr_cap = cap;
  double distorted_sum = 0.0;
  for (const auto& r : results) distorted_sum += r.distorted_psnr;
  report.distorted_mean_psnr = distorted_sum / static_cast<double>(manifest.size());

  for (std::size_t si = 0; si < strategies.size(); ++si) {
    StrategyReport sr;
    sr.strategy = strategies[si];
    sr.n_samples = manifest.size();
    double sum = 0.0;
    std::size_t hits = 0, judged = 0;
    for (std::size_t i = 0; i < manifest.size(); ++i) {
      const double v = results[i].psnr[si];
      sum += v;
      const int k = kind_index(manifest[i].label);
      sr.per_label_psnr[k] += v;
      ++sr.per_label_count[k];
      if (results[i].id_hit[si] >= 0) {
        ++judged;
        hits += static_cast<std::size_t>(results[i].id_hit[si]);
      }
    }
    sr.mean_psnr = sum / static_cast<double>(manifest.size());
    for (int k = 0; k < kNumKinds; ++k)
      if (sr.per_label_count[k]) sr.per_label_psnr[k] /= static_cast<double>(sr.per_label_count[k]);
    if (judged) sr.id_accuracy = static_cast<double>(hits) / static_cast<double>(judged);
    report.strategies.push_back(sr);
  }

  const auto* oracle = report.find(Strategy::OracleMTL);
  const auto* fixed1 = report.find(Strategy::Fixed1);
  if (oracle && fixed1 && oracle->mean_psnr != fixed1->mean_psnr) {
    const double upper = oracle->mean_psnr, lower = fixed1->mean_psnr;
    for (auto& sr : report.strategies) sr.normalized = normalized_score(sr.mean_psnr, lower, upper);
  }
  return report;
}

std::string report_to_json(const EvalReport& report, int indent) {
  using nlohmann::json;
  json rows = json::array();
  std::vector<const StrategyReport*> ranked;
  for (const auto& sr : report.strategies) {
    json per_label = json::object();
    for (int k = 0; k < kNumKinds; ++k)
      if (sr.per_label_count[k])
        per_label[std::string(kind_name(static_cast<DistortionKind>(k)))] = {
            {"mean_psnr", sr.per_label_psnr[k]}, {"n_samples", sr.per_label_count[k]}};
    rows.push_back({{"strategy", strategy_name(sr.strategy)},
                    {"mean_psnr", sr.mean_psnr},
                    {"id_accuracy", sr.id_accuracy ? json(*sr.id_accuracy) : json(nullptr)},
                    {"normalized_score", sr.normalized ? json(*sr.normalized) : json(nullptr)},
                    {"n_samples", sr.n_samples},
                    {"per_label", per_label}});
    ranked.push_back(&sr);
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const StrategyReport* a, const StrategyReport* b) { return a->mean_psnr > b->mean_psnr; });
  json ranking = json::array();
  for (const auto* sr : ranked) ranking.push_back(strategy_name(sr->strategy));
  json doc = {{"seed", report.seed},
              {"n_samples", report.n_samples},
              {"psnr_cap", report.psnr_cap},
              {"distorted_mean_psnr", report.distorted_mean_psnr},
              {"strategies", rows},
              {"ranking", ranking}};
  return doc.dump(indent);
}

std::string report_to_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "strategy,mean_psnr,id_accuracy,normalized_score,n_samples\n";
  char buf[64];
  for (const auto& sr : report.strategies) {
    out << strategy_name(sr.strategy) << ',';
    std::snprintf(buf, sizeof buf, "%.6f", sr.mean_psnr);
    out << buf << ',';
    if (sr.id_accuracy) {
      std::snprintf(buf, sizeof buf, "%.6f", *sr.id_accuracy);
      out << buf;
    }
    out << ',';
    if (sr.normalized) {
      std::snprintf(buf, sizeof buf, "%.6f", *sr.normalized);
      out << buf;
    }
    out << ',' << sr.n_samples << '\n';
  }
  return out.str();
}

}  // namespace deepclean
