/*
 * Copyright 2026 The DeepClean Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the DeepClean restoration planner. Every function returns a
 * dc_status; on failure dc_last_error() holds a one-line diagnostic for the
 * calling thread. Objects are opaque handles released with their _free call.
 * Strings returned through char** are owned by the caller and released with
 * dc_string_free.
 */
#ifndef DEEPCLEAN_DEEPCLEAN_H
#define DEEPCLEAN_DEEPCLEAN_H

#include <stddef.h>
#include <stdint.h>

#if defined(DEEPCLEAN_BUILDING_LIBRARY)
#define DC_API __attribute__((visibility("default")))
#else
#define DC_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dc_status {
  DC_OK = 0,
  DC_ERR_INVALID_ARGUMENT = 1,
  DC_ERR_FILE_NOT_FOUND = 2,
  DC_ERR_CORRUPT_FORMAT = 3,
  DC_ERR_IO = 4,
  DC_ERR_BAD_MAGIC = 5,
  DC_ERR_VERSION_MISMATCH = 6,
  DC_ERR_TRUNCATED = 7,
  DC_ERR_ORDERING_MISMATCH = 8,
  DC_ERR_DIMENSION_MISMATCH = 9,
  DC_ERR_MISSING_MODEL = 10,
  DC_ERR_INTERNAL = 11
} dc_status;

/* Canonical kind order; identical to the model head order. */
typedef enum dc_kind {
  DC_KIND_CLEAN = 0,
  DC_KIND_UNDEREXPOSED = 1,
  DC_KIND_OVEREXPOSED = 2,
  DC_KIND_NOISE_LOW = 3,
  DC_KIND_NOISE_HIGH = 4
} dc_kind;

#define DC_NUM_KINDS 5

typedef struct dc_image dc_image;
typedef struct dc_pool dc_pool;
typedef struct dc_model dc_model;

DC_API const char* dc_version(void);
DC_API const char* dc_last_error(void);
DC_API const char* dc_status_name(dc_status status);
DC_API const char* dc_kind_name(int kind);
DC_API void dc_string_free(char* s);
/* Number of worker threads for a request of n (<= 0 means all cores). */
DC_API int dc_resolve_threads(int n);

/* ---- images ------------------------------------------------------------ */
DC_API dc_status dc_image_create(int height, int width, int channels, const unsigned char* data, dc_image** out);
DC_API dc_status dc_image_load(const char* path, dc_image** out);
DC_API dc_status dc_image_save(const dc_image* img, const char* path);
DC_API void dc_image_free(dc_image* img);
DC_API dc_status dc_image_shape(const dc_image* img, int* height, int* width, int* channels);
DC_API const unsigned char* dc_image_data(const dc_image* img);
/* +inf for identical images. */
DC_API dc_status dc_psnr(const dc_image* a, const dc_image* b, double* out);

/* ---- corrector pools ------------------------------------------------------ */
/* names: comma-separated list such as "gamma_0.5,blur_0.8,median_3";
 * NULL or "" selects the default pool. */
DC_API dc_status dc_pool_create(const char* names, dc_pool** out);
DC_API void dc_pool_free(dc_pool* pool);
DC_API size_t dc_pool_size(const dc_pool* pool);
DC_API const char* dc_pool_name(const dc_pool* pool, size_t index);
DC_API const char* dc_pool_default_names(void);

/* ---- dataset synthesis ---------------------------------------------------- */
typedef struct dc_synth_options {
  const double* gammas_dark;   /* NULL keeps the default list */
  size_t n_gammas_dark;
  const double* gammas_bright;
  size_t n_gammas_bright;
  const double* sigmas_low;
  size_t n_sigmas_low;
  const double* sigmas_high;
  size_t n_sigmas_high;
  int test_variant;      /* non-zero: unseen parameter set, all samples in the test split */
  uint64_t seed;
  int image_size;        /* clean sources are resized to image_size^2; 0 keeps native size */
  double test_fraction;
  int threads;
} dc_synth_options;

typedef struct dc_synth_result {
  size_t n_samples;
  size_t n_train;
  size_t n_test;
  size_t n_sources;
} dc_synth_result;

DC_API void dc_synth_options_default(dc_synth_options* opts);
DC_API dc_status dc_synthesize(const char* clean_dir, const char* out_dir, const dc_synth_options* opts,
                               dc_synth_result* result);
/* Writes count procedural clean scenes (scene_NNNN.png) into out_dir. */
DC_API dc_status dc_render_scenes(const char* out_dir, size_t count, int size, uint64_t seed);

/* ---- models --------------------------------------------------------------- */
/* arch: "mtl" (multi-task, five binary heads) or "hcc" (5-way classifier). */
DC_API dc_status dc_model_create(const char* arch, uint64_t seed, dc_model** out);
DC_API dc_status dc_model_load(const char* path, dc_model** out);
DC_API dc_status dc_model_save(const dc_model* model, const char* path);
DC_API void dc_model_free(dc_model* model);
DC_API const char* dc_model_arch(const dc_model* model);
/* probs may be NULL; otherwise receives DC_NUM_KINDS values. */
DC_API dc_status dc_model_identify(const dc_model* model, const dc_image* img, int* kind, double* probs);

typedef struct dc_train_options {
  double lr;
  double final_lr;       /* > 0: cosine decay from lr to final_lr; otherwise constant */
  double weight_decay;
  int epochs;
  int batch_size;
  uint64_t seed;
  int threads;
  const char* log_path;  /* JSON lines, one record per epoch; NULL disables */
  int verbose;           /* non-zero: one progress line per epoch on stderr */
} dc_train_options;

DC_API void dc_train_options_default(dc_train_options* opts);
/* Trains on the samples of the manifest; final_accuracy receives the last
 * epoch's training accuracy (may be NULL). */
DC_API dc_status dc_model_train(dc_model* model, const char* manifest_path, const dc_train_options* opts,
                                double* final_accuracy);
DC_API dc_status dc_model_accuracy(const dc_model* model, const char* manifest_path, int threads, double* out);

/* ---- restoration ---------------------------------------------------------- */
/* reference may be NULL; when present each trace step carries its PSNR. */
DC_API dc_status dc_clean_image(const dc_model* model, const dc_pool* pool, const dc_image* img,
                                const dc_image* reference, int max_iters, int threads, dc_image** restored,
                                char** trace_json);
/* Restores every sample of a manifest into out_dir as <id>.png plus
 * <id>.trace.json, using the manifest's clean references. */
DC_API dc_status dc_clean_manifest(const dc_model* model, const dc_pool* pool, const char* manifest_path,
                                   const char* out_dir, int max_iters, int threads, size_t* n_done);

/* ---- evaluation ----------------------------------------------------------- */
typedef struct dc_eval_options {
  const char* strategies;  /* comma list of deepclean,oracle,random,hcc,fixed1,fixed2 */
  uint64_t seed;
  int threads;
  int max_iters;
  double psnr_cap;
} dc_eval_options;

DC_API void dc_eval_options_default(dc_eval_options* opts);
/* mtl / hcc may be NULL when no requested strategy needs them. Writes
 * <report_prefix>.json and <report_prefix>.csv when report_prefix is non-NULL;
 * report_json (may be NULL) receives the JSON report. */
DC_API dc_status dc_evaluate(const char* manifest_path, const dc_model* mtl, const dc_model* hcc,
                             const dc_pool* pool, const dc_eval_options* opts, const char* report_prefix,
                             char** report_json);
DC_API const char* dc_strategy_names(void);

#ifdef __cplusplus
}
#endif

#endif /* DEEPCLEAN_DEEPCLEAN_H */
