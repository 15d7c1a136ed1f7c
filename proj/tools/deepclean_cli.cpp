// Copyright 2026 The DeepClean Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end. Talks to the library exclusively through the C API.

#include <cstdio>
#include <cstdlib>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "deepclean/deepclean.h"
#include "json.hpp"

namespace {

struct Failure {
  dc_status status;
};

void check(dc_status st) {
  if (st != DC_OK) throw Failure{st};
}

struct ImageDeleter {
  void operator()(dc_image* p) const { dc_image_free(p); }
};
struct ModelDeleter {
  void operator()(dc_model* p) const { dc_model_free(p); }
};
struct PoolDeleter {
  void operator()(dc_pool* p) const { dc_pool_free(p); }
};
struct StringDeleter {
  void operator()(char* p) const { dc_string_free(p); }
};
using ImagePtr = std::unique_ptr<dc_image, ImageDeleter>;
using ModelPtr = std::unique_ptr<dc_model, ModelDeleter>;
using PoolPtr = std::unique_ptr<dc_pool, PoolDeleter>;
using StringPtr = std::unique_ptr<char, StringDeleter>;

ModelPtr load_model(const std::string& path) {
  dc_model* m = nullptr;
  check(dc_model_load(path.c_str(), &m));
  return ModelPtr(m);
}

PoolPtr make_pool(const std::string& names) {
  dc_pool* p = nullptr;
  check(dc_pool_create(names.c_str(), &p));
  return PoolPtr(p);
}

ImagePtr load(const std::string& path) {
  dc_image* img = nullptr;
  check(dc_image_load(path.c_str(), &img));
  return ImagePtr(img);
}

void write_text(const std::string& path, const std::string& text) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) {
    std::fprintf(stderr, "error: cannot write %s\n", path.c_str());
    throw Failure{DC_ERR_IO};
  }
  std::fputs(text.c_str(), f);
  std::fclose(f);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deepclean: distortion identification and corrector selection for image restoration"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(dc_version()));

  std::uint64_t seed = 42;
  int threads = 0;
  app.add_option("--seed", seed, "Global seed")->capture_default_str();
  app.add_option("--threads", threads, "Worker threads (0 = all cores, 1 = deterministic serial mode)");

  // scenes
  auto* scenes = app.add_subcommand("scenes", "Render procedural clean scenes into a directory");
  std::string scenes_out;
  std::size_t scenes_count = 60;
  int scenes_size = 64;
  scenes->add_option("--out", scenes_out, "Output directory")->required();
  scenes->add_option("--count", scenes_count, "Number of scenes")->capture_default_str();
  scenes->add_option("--size", scenes_size, "Square size in pixels")->capture_default_str();

  // synth
  auto* synth = app.add_subcommand("synth", "Synthesize a labeled distortion dataset from clean images");
  std::string clean_dir, synth_out;
  std::vector<double> gammas_dark, gammas_bright, sigmas_low, sigmas_high;
  bool test_variant = false;
  int image_size = 64;
  double test_fraction = 0.2;
  synth->add_option("--clean-dir", clean_dir, "Directory of clean images")->required();
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--gammas-dark", gammas_dark, "Darkening gammas (> 1)")->delimiter(',');
  synth->add_option("--gammas-bright", gammas_bright, "Brightening gammas (< 1)")->delimiter(',');
  synth->add_option("--sigmas-low", sigmas_low, "Low-noise sigmas")->delimiter(',');
  synth->add_option("--sigmas-high", sigmas_high, "High-noise sigmas")->delimiter(',');
  synth->add_flag("--test-variant", test_variant, "Use the unseen parameter set; every sample is a test sample");
  synth->add_option("--image-size", image_size, "Resize clean sources to this square size (0 = native)")
      ->capture_default_str();
  synth->add_option("--test-fraction", test_fraction, "Fraction of clean sources held out")->capture_default_str();

  // train
  auto* train = app.add_subcommand("train", "Train an identification model on a manifest");
  std::string train_manifest, train_out, train_log, arch = "mtl";
  dc_train_options topts;
  dc_train_options_default(&topts);
  train->add_option("--manifest", train_manifest, "Training manifest (JSON lines)")->required();
  train->add_option("--out", train_out, "Checkpoint path")->required();
  train->add_option("--epochs", topts.epochs, "Epochs")->capture_default_str();
  train->add_option("--lr", topts.lr, "Adam learning rate")->capture_default_str();
  train->add_option("--final-lr", topts.final_lr, "Cosine-decay the learning rate to this value (0 = constant)")
      ->capture_default_str();
  train->add_option("--weight-decay", topts.weight_decay, "L2 weight decay")->capture_default_str();
  train->add_option("--batch-size", topts.batch_size, "Minibatch size")->capture_default_str();
  train->add_option("--arch", arch, "mtl or hcc")->check(CLI::IsMember({"mtl", "hcc"}))->capture_default_str();
  train->add_option("--log", train_log, "Training log path (default: <out>.log.jsonl)");

  // identify
  auto* ident = app.add_subcommand("identify", "Print the predicted latest distortion of an image");
  std::string ident_model, ident_image, ident_manifest;
  ident->add_option("--model", ident_model, "Checkpoint")->required();
  auto* ident_img_opt = ident->add_option("--image", ident_image, "Input image");
  auto* ident_man_opt = ident->add_option("--manifest", ident_manifest, "Report accuracy over a manifest instead");
  ident_img_opt->excludes(ident_man_opt);
  ident->require_option(2);

  // clean
  auto* clean = app.add_subcommand("clean", "Iteratively identify and correct distortions");
  std::string clean_model, clean_image, clean_manifest, clean_out, clean_trace, clean_ref;
  std::string pool_names = dc_pool_default_names();
  int max_iters = 4;
  clean->add_option("--model", clean_model, "Multi-task checkpoint")->required();
  auto* img_opt = clean->add_option("--image", clean_image, "Input image");
  auto* man_opt = clean->add_option("--manifest", clean_manifest, "Manifest of inputs with clean references");
  img_opt->excludes(man_opt);
  clean->add_option("--pool", pool_names, "Comma-separated corrector names")->capture_default_str();
  clean->add_option("--max-iters", max_iters, "Maximum correction steps")->capture_default_str();
  clean->add_option("--out", clean_out, "Restored image path (--image) or output directory (--manifest)")->required();
  clean->add_option("--trace", clean_trace, "Trace JSON path (--image mode)");
  clean->add_option("--reference", clean_ref, "Clean reference image for per-step PSNR (--image mode)");

  // eval
  auto* eval = app.add_subcommand("eval", "Compare restoration strategies on a manifest");
  std::string eval_manifest, eval_model, eval_hcc, eval_report, strategies = dc_strategy_names();
  double psnr_cap = 60.0;
  eval->add_option("--manifest", eval_manifest, "Evaluation manifest")->required();
  eval->add_option("--model", eval_model, "Multi-task checkpoint (deepclean, random)");
  eval->add_option("--hcc-model", eval_hcc, "Classifier checkpoint (hcc)");
  eval->add_option("--pool", pool_names, "Comma-separated corrector names")->capture_default_str();
  eval->add_option("--strategies", strategies, "Comma list of strategies")->capture_default_str();
  eval->add_option("--report", eval_report, "Report path prefix (.json and .csv are appended)")->required();
  eval->add_option("--max-iters", max_iters, "Maximum correction steps")->capture_default_str();
  eval->add_option("--psnr-cap", psnr_cap, "Per-sample PSNR ceiling before averaging")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*scenes) {
      check(dc_render_scenes(scenes_out.c_str(), scenes_count, scenes_size, seed));
      std::printf("%zu scenes written to %s\n", scenes_count, scenes_out.c_str());
    } else if (*synth) {
      dc_synth_options o;
      dc_synth_options_default(&o);
      o.seed = seed;
      o.threads = threads;
      o.test_variant = test_variant ? 1 : 0;
      o.image_size = image_size;
      o.test_fraction = test_fraction;
      if (!gammas_dark.empty()) o.gammas_dark = gammas_dark.data(), o.n_gammas_dark = gammas_dark.size();
      if (!gammas_bright.empty()) o.gammas_bright = gammas_bright.data(), o.n_gammas_bright = gammas_bright.size();
      if (!sigmas_low.empty()) o.sigmas_low = sigmas_low.data(), o.n_sigmas_low = sigmas_low.size();
      if (!sigmas_high.empty()) o.sigmas_high = sigmas_high.data(), o.n_sigmas_high = sigmas_high.size();
      dc_synth_result r{};
      check(dc_synthesize(clean_dir.c_str(), synth_out.c_str(), &o, &r));
      std::printf("%zu samples (%zu train, %zu test) from %zu clean images\n", r.n_samples, r.n_train, r.n_test,
                  r.n_sources);
    } else if (*train) {
      dc_model* raw = nullptr;
      check(dc_model_create(arch.c_str(), seed, &raw));
      ModelPtr model(raw);
      if (train_log.empty()) train_log = train_out + ".log.jsonl";
      topts.seed = seed;
      topts.threads = threads;
      topts.log_path = train_log.c_str();
      topts.verbose = 1;
      double acc = 0.0;
      check(dc_model_train(model.get(), train_manifest.c_str(), &topts, &acc));
      check(dc_model_save(model.get(), train_out.c_str()));
      std::printf("final train accuracy %.4f\n", acc);
    } else if (*ident) {
      auto model = load_model(ident_model);
      if (!ident_manifest.empty()) {
        double acc = 0.0;
        check(dc_model_accuracy(model.get(), ident_manifest.c_str(), threads, &acc));
        std::printf("accuracy %.4f\n", acc);
        return 0;
      }
      auto img = load(ident_image);
      int kind = 0;
      double probs[DC_NUM_KINDS];
      check(dc_model_identify(model.get(), img.get(), &kind, probs));
      std::printf("%s", dc_kind_name(kind));
      for (int k = 0; k < DC_NUM_KINDS; ++k) std::printf(" %s=%.4f", dc_kind_name(k), probs[k]);
      std::printf("\n");
    } else if (*clean) {
      if (clean_image.empty() == clean_manifest.empty()) {
        std::fprintf(stderr, "error: exactly one of --image or --manifest is required\n");
        return 2;
      }
      auto model = load_model(clean_model);
      auto pool = make_pool(pool_names);
      if (!clean_image.empty()) {
        auto img = load(clean_image);
        ImagePtr ref;
        if (!clean_ref.empty()) ref = load(clean_ref);
        dc_image* restored = nullptr;
        char* trace = nullptr;
        check(dc_clean_image(model.get(), pool.get(), img.get(), ref.get(), max_iters, threads, &restored, &trace));
        ImagePtr restored_ptr(restored);
        StringPtr trace_ptr(trace);
        check(dc_image_save(restored, clean_out.c_str()));
        if (!clean_trace.empty()) write_text(clean_trace, std::string(trace) + "\n");
        const auto doc = nlohmann::json::parse(trace);
        std::size_t corrections = 0;
        for (const auto& s : doc["steps"]) corrections += s["chosen"].is_null() ? 0 : 1;
        std::printf("%zu correction(s), terminated: %s\n", corrections,
                    doc["terminated"].get<std::string>().c_str());
      } else {
        std::size_t n = 0;
        check(dc_clean_manifest(model.get(), pool.get(), clean_manifest.c_str(), clean_out.c_str(), max_iters,
                                threads, &n));
        std::printf("%zu images restored into %s\n", n, clean_out.c_str());
      }
    } else if (*eval) {
      ModelPtr mtl, hcc;
      if (!eval_model.empty()) mtl = load_model(eval_model);
      if (!eval_hcc.empty()) hcc = load_model(eval_hcc);
      auto pool = make_pool(pool_names);
      dc_eval_options o;
      dc_eval_options_default(&o);
      o.strategies = strategies.c_str();
      o.seed = seed;
      o.threads = threads;
      o.max_iters = max_iters;
      o.psnr_cap = psnr_cap;
      char* json = nullptr;
      check(dc_evaluate(eval_manifest.c_str(), mtl.get(), hcc.get(), pool.get(), &o, eval_report.c_str(), &json));
      StringPtr json_ptr(json);
      const auto doc = nlohmann::json::parse(json);
      std::printf("%-10s %10s %12s %11s\n", "strategy", "mean_psnr", "id_accuracy", "normalized");
      for (const auto& name : doc["ranking"]) {
        for (const auto& row : doc["strategies"]) {
          if (row["strategy"] != name) continue;
          auto fmt = [](const nlohmann::json& v) {
            char buf[32];
            if (v.is_null()) return std::string("-");
            std::snprintf(buf, sizeof buf, "%.4f", v.get<double>());
            return std::string(buf);
          };
          std::printf("%-10s %10.4f %12s %11s\n", name.get<std::string>().c_str(), row["mean_psnr"].get<double>(),
                      fmt(row["id_accuracy"]).c_str(), fmt(row["normalized_score"]).c_str());
        }
      }
    }
  } catch (const Failure& f) {
    std::fprintf(stderr, "error: %s: %s\n", dc_status_name(f.status), dc_last_error());
    return 1;
  }
  return 0;
}
