// Copyright 2026 The DeepClean Authors
// SPDX-License-Identifier: Apache-2.0

#include "deepclean/deepclean.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <new>
#include <string>

#include "correctors.hpp"
#include "dataset.hpp"
#include "json.hpp"
#include "model.hpp"
#include "parallel.hpp"
#include "planner.hpp"
#include "scenes.hpp"
#include "strategies.hpp"

struct dc_image {
  deepclean::ImageU8 img;
};
struct dc_pool {
  deepclean::AlgorithmPool pool;
};
struct dc_model {
  deepclean::DistortionModel model;
};

namespace {

using namespace deepclean;

thread_local std::string g_last_error;

dc_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return DC_ERR_INVALID_ARGUMENT;
    case ErrorCode::FileNotFound: return DC_ERR_FILE_NOT_FOUND;
    case ErrorCode::CorruptFormat: return DC_ERR_CORRUPT_FORMAT;
    case ErrorCode::Io: return DC_ERR_IO;
    case ErrorCode::BadMagic: return DC_ERR_BAD_MAGIC;
    case ErrorCode::VersionMismatch: return DC_ERR_VERSION_MISMATCH;
    case ErrorCode::Truncated: return DC_ERR_TRUNCATED;
    case ErrorCode::OrderingMismatch: return DC_ERR_ORDERING_MISMATCH;
    case ErrorCode::DimensionMismatch: return DC_ERR_DIMENSION_MISMATCH;
    case ErrorCode::MissingModel: return DC_ERR_MISSING_MODEL;
    case ErrorCode::Internal: return DC_ERR_INTERNAL;
  }
  return DC_ERR_INTERNAL;
}

// Runs fn, translating exceptions into status codes and the thread-local message.
template <typename Fn>
dc_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return DC_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return DC_ERR_INTERNAL;
}

void need(const void* p, const char* what) {
  if (!p) fail(ErrorCode::InvalidArgument, std::string(what) + " must not be NULL");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorCode::Io, "short write to " + path.string());
}

std::string g_strategy_names = [] {
  std::string s;
  for (auto st : kAllStrategies) s += (s.empty() ? "" : ",") + std::string(strategy_name(st));
  return s;
}();

}  // namespace

extern "C" {

const char* dc_version(void) { return "1.0.0"; }
const char* dc_last_error(void) { return g_last_error.c_str(); }

const char* dc_status_name(dc_status status) {
  switch (status) {
    case DC_OK: return "ok";
    case DC_ERR_INVALID_ARGUMENT: return "invalid argument";
    case DC_ERR_FILE_NOT_FOUND: return "file not found";
    case DC_ERR_CORRUPT_FORMAT: return "corrupt format";
    case DC_ERR_IO: return "i/o error";
    case DC_ERR_BAD_MAGIC: return "bad magic";
    case DC_ERR_VERSION_MISMATCH: return "version mismatch";
    case DC_ERR_TRUNCATED: return "truncated";
    case DC_ERR_ORDERING_MISMATCH: return "kind ordering mismatch";
    case DC_ERR_DIMENSION_MISMATCH: return "dimension mismatch";
    case DC_ERR_MISSING_MODEL: return "missing model";
    case DC_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* dc_kind_name(int kind) {
  if (kind < 0 || kind >= kNumKinds) return "";
  return kind_name(static_cast<DistortionKind>(kind)).data();
}

void dc_string_free(char* s) { std::free(s); }
int dc_resolve_threads(int n) { return resolve_threads(n); }

dc_status dc_image_create(int height, int width, int channels, const unsigned char* data, dc_image** out) {
  return guarded([&] {
    need(data, "data");
    need(out, "out");
    std::vector<std::uint8_t> bytes(data, data + static_cast<std::size_t>(std::max(height, 0)) *
                                                   std::max(width, 0) * std::max(channels, 0));
    *out = new dc_image{ImageU8(height, width, channels, std::move(bytes))};
  });
}

dc_status dc_image_load(const char* path, dc_image** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new dc_image{load_image(path)};
  });
}

dc_status dc_image_save(const dc_image* img, const char* path) {
  return guarded([&] {
    need(img, "img");
    need(path, "path");
    save_image(img->img, path);
  });
}

void dc_image_free(dc_image* img) { delete img; }

dc_status dc_image_shape(const dc_image* img, int* height, int* width, int* channels) {
  return guarded([&] {
    need(img, "img");
    if (height) *height = img->img.height();
    if (width) *width = img->img.width();
    if (channels) *channels = img->img.channels();
  });
}

const unsigned char* dc_image_data(const dc_image* img) { return img ? img->img.data().data() : nullptr; }

dc_status dc_psnr(const dc_image* a, const dc_image* b, double* out) {
  return guarded([&] {
    need(a, "a");
    need(b, "b");
    need(out, "out");
    *out = psnr(a->img, b->img);
  });
}

dc_status dc_pool_create(const char* names, dc_pool** out) {
  return guarded([&] {
    need(out, "out");
    *out = new dc_pool{(names && *names) ? make_pool(names) : default_pool()};
  });
}

void dc_pool_free(dc_pool* pool) { delete pool; }
size_t dc_pool_size(const dc_pool* pool) { return pool ? pool->pool.size() : 0; }

const char* dc_pool_name(const dc_pool* pool, size_t index) {
  if (!pool || index >= pool->pool.size()) return nullptr;
  return pool->pool.algorithms()[index].name.c_str();
}

const char* dc_pool_default_names(void) { return kDefaultPoolNames.data(); }

void dc_synth_options_default(dc_synth_options* opts) {
  if (!opts) return;
  std::memset(opts, 0, sizeof *opts);
  const DatasetConfig d;
  opts->seed = d.seed;
  opts->image_size = d.model_input_size;
  opts->test_fraction = d.test_fraction;
  opts->threads = 1;
}

dc_status dc_synthesize(const char* clean_dir, const char* out_dir, const dc_synth_options* opts,
                        dc_synth_result* result) {
  return guarded([&] {
    need(clean_dir, "clean_dir");
    need(out_dir, "out_dir");
    dc_synth_options o;
    dc_synth_options_default(&o);
    if (opts) o = *opts;
    DatasetConfig config = o.test_variant ? DatasetConfig::unseen() : DatasetConfig{};
    auto take = [](const double* p, size_t n, std::vector<double>& dst) {
      if (p) dst.assign(p, p + n);
    };
    take(o.gammas_dark, o.n_gammas_dark, config.gammas_dark);
    take(o.gammas_bright, o.n_gammas_bright, config.gammas_bright);
    take(o.sigmas_low, o.n_sigmas_low, config.sigmas_low);
    take(o.sigmas_high, o.n_sigmas_high, config.sigmas_high);
    config.seed = o.seed;
    config.model_input_size = o.image_size;
    config.test_fraction = o.test_fraction;
    config.all_test = o.test_variant != 0;
    config.threads = resolve_threads(o.threads);
    const auto summary = generate_dataset(clean_dir, out_dir, config);
    if (result) {
      result->n_samples = summary.samples.size();
      result->n_train = summary.n_train;
      result->n_test = summary.n_test;
      result->n_sources = summary.samples.size() / config.variants_per_image();
    }
  });
}

dc_status dc_render_scenes(const char* out_dir, size_t count, int size, uint64_t seed) {
  return guarded([&] {
    need(out_dir, "out_dir");
    require(count > 0, "scene count must be positive");
    write_scenes(out_dir, count, size, seed);
  });
}

dc_status dc_model_create(const char* arch, uint64_t seed, dc_model** out) {
  return guarded([&] {
    need(arch, "arch");
    need(out, "out");
    ModelConfig config = parse_arch(arch) == Arch::MultiTask ? ModelConfig::multitask() : ModelConfig::classifier();
    config.seed = seed;
    *out = new dc_model{DistortionModel(config)};
  });
}

dc_status dc_model_load(const char* path, dc_model** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new dc_model{DistortionModel::load(path)};
  });
}

dc_status dc_model_save(const dc_model* model, const char* path) {
  return guarded([&] {
    need(model, "model");
    need(path, "path");
    model->model.save(path);
  });
}

void dc_model_free(dc_model* model) { delete model; }

const char* dc_model_arch(const dc_model* model) { return model ? arch_name(model->model.arch()).data() : ""; }

dc_status dc_model_identify(const dc_model* model, const dc_image* img, int* kind, double* probs) {
  return guarded([&] {
    need(model, "model");
    need(img, "img");
    const auto out = model->model.analyze(img->img);
    if (kind) *kind = kind_index(predicted_kind(out));
    if (probs) std::copy(out.head_prob.begin(), out.head_prob.end(), probs);
  });
}

void dc_train_options_default(dc_train_options* opts) {
  if (!opts) return;
  std::memset(opts, 0, sizeof *opts);
  const TrainOptions d;
  opts->lr = d.lr;
  opts->weight_decay = d.weight_decay;
  opts->epochs = d.epochs;
  opts->batch_size = d.batch_size;
  opts->seed = d.seed;
  opts->threads = 1;
}

dc_status dc_model_train(dc_model* model, const char* manifest_path, const dc_train_options* opts,
                         double* final_accuracy) {
  return guarded([&] {
    need(model, "model");
    need(manifest_path, "manifest_path");
    dc_train_options o;
    dc_train_options_default(&o);
    if (opts) o = *opts;
    TrainOptions t;
    t.lr = o.lr;
    t.final_lr = o.final_lr;
    t.weight_decay = o.weight_decay;
    t.epochs = o.epochs;
    t.batch_size = o.batch_size;
    t.seed = o.seed;
    t.threads = resolve_threads(o.threads);

    const auto manifest = read_manifest(manifest_path);
    require(!manifest.empty(), "training manifest is empty");
    const auto samples = load_labeled(manifest, t.threads);

    std::unique_ptr<std::ofstream> log;
    if (o.log_path) {
      log = std::make_unique<std::ofstream>(o.log_path, std::ios::trunc);
      if (!*log) fail(ErrorCode::Io, std::string("cannot write training log ") + o.log_path);
    }
    const auto history = model->model.train(samples, t, [&](const EpochStats& s) {
      if (log) {
        *log << nlohmann::json{{"epoch", s.epoch}, {"mean_loss", s.mean_loss}, {"train_accuracy", s.train_accuracy}}
                    .dump()
             << '\n';
        log->flush();
      }
      if (o.verbose)
        std::fprintf(stderr, "epoch %d  loss %.4f  train_acc %.4f\n", s.epoch, s.mean_loss, s.train_accuracy);
    });
    if (final_accuracy) *final_accuracy = history.empty() ? 0.0 : history.back().train_accuracy;
  });
}

dc_status dc_model_accuracy(const dc_model* model, const char* manifest_path, int threads, double* out) {
  return guarded([&] {
    need(model, "model");
    need(manifest_path, "manifest_path");
    need(out, "out");
    *out = identify_accuracy(model->model, read_manifest(manifest_path), resolve_threads(threads));
  });
}

dc_status dc_clean_image(const dc_model* model, const dc_pool* pool, const dc_image* img, const dc_image* reference,
                         int max_iters, int threads, dc_image** restored, char** trace_json) {
  return guarded([&] {
    need(model, "model");
    need(pool, "pool");
    need(img, "img");
    PipelineOptions po;
    po.max_iters = max_iters;
    po.threads = resolve_threads(threads);
    po.reference = reference ? &reference->img : nullptr;
    auto result = run_pipeline(model->model, img->img, pool->pool, po);
    if (trace_json) *trace_json = dup_string(trace_to_json(result.trace));
    if (restored) *restored = new dc_image{std::move(result.restored)};
  });
}

dc_status dc_clean_manifest(const dc_model* model, const dc_pool* pool, const char* manifest_path,
                            const char* out_dir, int max_iters, int threads, size_t* n_done) {
  return guarded([&] {
    need(model, "model");
    need(pool, "pool");
    need(manifest_path, "manifest_path");
    need(out_dir, "out_dir");
    const auto manifest = read_manifest(manifest_path);
    const std::filesystem::path dir(out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) fail(ErrorCode::Io, "cannot create " + dir.string());
    parallel_for(manifest.size(), resolve_threads(threads), [&](std::size_t i) {
      const auto& s = manifest[i];
      const ImageU8 distorted = load_image(s.distorted_path);
      const ImageU8 clean = load_image(s.clean_path);
      PipelineOptions po;
      po.max_iters = max_iters;
      po.reference = &clean;
      const auto result = run_pipeline(model->model, distorted, pool->pool, po);
      save_image(result.restored, dir / (s.id + ".png"));
      write_text(dir / (s.id + ".trace.json"), trace_to_json(result.trace) + "\n");
    });
    if (n_done) *n_done = manifest.size();
  });
}

void dc_eval_options_default(dc_eval_options* opts) {
  if (!opts) return;
  const EvalOptions d;
  opts->strategies = nullptr;
  opts->seed = d.seed;
  opts->threads = 1;
  opts->max_iters = d.max_iters;
  opts->psnr_cap = d.psnr_cap;
}

dc_status dc_evaluate(const char* manifest_path, const dc_model* mtl, const dc_model* hcc, const dc_pool* pool,
                      const dc_eval_options* opts, const char* report_prefix, char** report_json) {
  return guarded([&] {
    need(manifest_path, "manifest_path");
    need(pool, "pool");
    dc_eval_options o;
    dc_eval_options_default(&o);
    if (opts) o = *opts;
    const auto strategies = parse_strategy_list(o.strategies ? o.strategies : g_strategy_names.c_str());
    if (mtl && mtl->model.arch() != Arch::MultiTask)
      fail(ErrorCode::InvalidArgument, "the multi-task model slot holds a classifier checkpoint");
    if (hcc && hcc->model.arch() != Arch::Classifier)
      fail(ErrorCode::InvalidArgument, "the classifier model slot holds a multi-task checkpoint");
    EvalOptions eo;
    eo.seed = o.seed;
    eo.threads = resolve_threads(o.threads);
    eo.max_iters = o.max_iters;
    eo.psnr_cap = o.psnr_cap;
    const auto report = evaluate(read_manifest(manifest_path), strategies, mtl ? &mtl->model : nullptr,
                                 hcc ? &hcc->model : nullptr, pool->pool, eo);
    const std::string json = report_to_json(report);
    if (report_prefix) {
      write_text(std::string(report_prefix) + ".json", json + "\n");
      write_text(std::string(report_prefix) + ".csv", report_to_csv(report));
    }
    if (report_json) *report_json = dup_string(json);
  });
}

const char* dc_strategy_names(void) { return g_strategy_names.c_str(); }

}  // extern "C"
