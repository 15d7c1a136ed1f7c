// Copyright 2026 The DeepClean Authors
// SPDX-License-Identifier: Apache-2.0

#include "planner.hpp"

#include <cmath>

#include "json.hpp"
#include "parallel.hpp"

namespace deepclean {

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) fail(ErrorCode::DimensionMismatch, "cosine_similarity: length mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

DistortionKind identify(const FeatureModel& model, const ImageU8& img) { return predicted_kind(model.analyze(img)); }

std::string_view termination_name(Termination t) noexcept {
  switch (t) {
    case Termination::PredictedClean: return "predicted_clean";
    case Termination::MaxIters: return "max_iters";
    case Termination::NoCandidates: return "no_candidates";
  }
  return "unknown";
}

std::size_t PipelineTrace::corrections() const noexcept {
  std::size_t n = 0;
  for (const auto& s : steps) n += s.chosen.has_value();
  return n;
}

StepResult select(const FeatureModel& model, const ImageU8& img, DistortionKind kind, const AlgorithmPool& pool,
                  int threads) {
  require(kind != DistortionKind::Clean, "select: nothing to correct for Clean");
  StepResult result;
  result.identified = kind;
  result.image_after = img;
  const auto candidates = pool.candidates_for(kind);
  if (candidates.empty()) return result;

  const int k = kind_index(kind);
  const auto reference = model.analyze(img).head_hidden[k];
  std::vector<ImageU8> outputs(candidates.size());
  std::vector<double> scores(candidates.size());
  parallel_for(candidates.size(), threads, [&](std::size_t i) {
    outputs[i] = candidates[i]->apply(img);
    scores[i] = cosine_similarity(model.analyze(outputs[i]).head_hidden[k], reference);
  });

  std::size_t best = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    result.candidate_scores.push_back({candidates[i]->name, scores[i]});
    if (scores[i] < scores[best]) best = i;
  }
  result.chosen = candidates[best]->name;
  result.image_after = std::move(outputs[best]);
  return result;
}

PipelineResult run_pipeline(const FeatureModel& model, const ImageU8& img, const AlgorithmPool& pool,
                            const PipelineOptions& options) {
  require(options.max_iters >= 1, "max_iters must be >= 1");
  PipelineResult out{img, {}};
  auto& trace = out.trace;
  trace.terminated = Termination::MaxIters;
  for (int it = 0; it < options.max_iters; ++it) {
    const DistortionKind kind = identify(model, out.restored);
    StepResult step;
    if (kind == DistortionKind::Clean) {
      step.identified = kind;
      step.image_after = out.restored;
      trace.terminated = Termination::PredictedClean;
    } else {
      step = select(model, out.restored, kind, pool, options.threads);
      if (!step.chosen) trace.terminated = Termination::NoCandidates;
    }
    if (options.reference) step.psnr_vs_reference = psnr(step.image_after, *options.reference);
    out.restored = step.image_after;
    trace.steps.push_back(std::move(step));
    if (trace.terminated != Termination::MaxIters) break;
  }
  trace.iterations = static_cast<int>(trace.steps.size());
  return out;
}

std::string validate_trace(const PipelineTrace& trace, int max_iters) {
  if (trace.iterations != static_cast<int>(trace.steps.size())) return "iterations differs from step count";
  if (trace.iterations > max_iters) return "more steps than max_iters";
  if (trace.steps.empty()) return "trace has no steps";
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const auto& s = trace.steps[i];
    const bool should_choose = s.identified != DistortionKind::Clean && !s.candidate_scores.empty();
    if (s.chosen.has_value() != should_choose) return "step " + std::to_string(i) + ": chosen/identified mismatch";
    if (s.chosen) {
      std::size_t best = 0;
      for (std::size_t j = 1; j < s.candidate_scores.size(); ++j)
        if (s.candidate_scores[j].cosine < s.candidate_scores[best].cosine) best = j;
      if (s.candidate_scores[best].name != *s.chosen)
        return "step " + std::to_string(i) + ": chosen is not the first minimum";
    }
    const bool last = i + 1 == trace.steps.size();
    if (!last && !s.chosen) return "step " + std::to_string(i) + ": loop continued without a correction";
  }
  const bool last_clean = trace.steps.back().identified == DistortionKind::Clean;
  if (last_clean != (trace.terminated == Termination::PredictedClean)) return "termination reason disagrees with last step";
  if (trace.terminated == Termination::MaxIters && trace.iterations != max_iters) return "max_iters before the cap";
  if (trace.terminated == Termination::NoCandidates && !trace.steps.back().candidate_scores.empty())
    return "no_candidates with candidates present";
  return {};
}

std::string trace_to_json(const PipelineTrace& trace, int indent) {
  using nlohmann::json;
  json steps = json::array();
  for (const auto& s : trace.steps) {
    json scores = json::array();
    for (const auto& c : s.candidate_scores) scores.push_back({{"name", c.name}, {"cosine", c.cosine}});
    json step = {{"identified", kind_name(s.identified)}, {"scores", scores}};
    step["chosen"] = s.chosen ? json(*s.chosen) : json(nullptr);
    if (s.psnr_vs_reference) {
      step["psnr_vs_reference"] = std::isinf(*s.psnr_vs_reference) ? json("inf") : json(*s.psnr_vs_reference);
    }
    steps.push_back(std::move(step));
  }
  json doc = {{"steps", steps}, {"terminated", termination_name(trace.terminated)}, {"iterations", trace.iterations}};
  return doc.dump(indent);
}

}  // namespace deepclean
