// Copyright 2026 The DeepClean Authors
// SPDX-License-Identifier: Apache-2.0

// Exercises the shared library through its public header only.

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "deepclean/deepclean.h"
#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Scratch {
  fs::path path = fs::temp_directory_path() / ("dctest_capi_" + std::to_string(::getpid()));
  Scratch() {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string operator/(const std::string& s) const { return (path / s).string(); }
};

}  // namespace

TEST_CASE("status and kind names") {
  CHECK(std::string(dc_status_name(DC_OK)) == "ok");
  CHECK(std::string(dc_status_name(DC_ERR_BAD_MAGIC)) == "bad magic");
  CHECK(std::string(dc_kind_name(DC_KIND_NOISE_HIGH)) == "noise_high");
  CHECK(std::strlen(dc_version()) > 0);
  CHECK(dc_resolve_threads(3) == 3);
  CHECK(dc_resolve_threads(0) >= 1);
}

TEST_CASE("images through the C API") {
  Scratch s;
  std::vector<unsigned char> px(4 * 5 * 3);
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = static_cast<unsigned char>(i * 7);
  dc_image* img = nullptr;
  REQUIRE(dc_image_create(4, 5, 3, px.data(), &img) == DC_OK);
  int h = 0, w = 0, c = 0;
  CHECK(dc_image_shape(img, &h, &w, &c) == DC_OK);
  CHECK((h == 4 && w == 5 && c == 3));
  CHECK(std::memcmp(dc_image_data(img), px.data(), px.size()) == 0);
  CHECK(dc_image_save(img, (s / "a.png").c_str()) == DC_OK);
  dc_image* back = nullptr;
  REQUIRE(dc_image_load((s / "a.png").c_str(), &back) == DC_OK);
  double p = 0;
  CHECK(dc_psnr(img, back, &p) == DC_OK);
  CHECK(std::isinf(p));
  dc_image_free(back);

  dc_image* bad = nullptr;
  CHECK(dc_image_create(0, 5, 3, px.data(), &bad) == DC_ERR_INVALID_ARGUMENT);
  CHECK(bad == nullptr);
  CHECK(std::strlen(dc_last_error()) > 0);
  CHECK(dc_image_load((s / "missing.png").c_str(), &bad) == DC_ERR_FILE_NOT_FOUND);
  std::ofstream(s / "junk.png") << "junk";
  CHECK(dc_image_load((s / "junk.png").c_str(), &bad) == DC_ERR_CORRUPT_FORMAT);
  CHECK(dc_image_create(1, 1, 3, nullptr, &bad) == DC_ERR_INVALID_ARGUMENT);
  dc_image* other = nullptr;
  REQUIRE(dc_image_create(2, 2, 3, px.data(), &other) == DC_OK);
  CHECK(dc_psnr(img, other, &p) == DC_ERR_DIMENSION_MISMATCH);
  dc_image_free(other);
  dc_image_free(img);
  dc_image_free(nullptr);
}

TEST_CASE("pools through the C API") {
  dc_pool* pool = nullptr;
  REQUIRE(dc_pool_create(nullptr, &pool) == DC_OK);
  CHECK(dc_pool_size(pool) == 8u);
  CHECK(std::string(dc_pool_name(pool, 0)) == "gamma_0.33");
  CHECK(dc_pool_name(pool, 8) == nullptr);
  dc_pool_free(pool);
  CHECK(dc_pool_create("gamma_0.5,unknown_1", &pool) == DC_ERR_INVALID_ARGUMENT);
  CHECK(std::string(dc_pool_default_names()).find("median_5") != std::string::npos);
}

TEST_CASE("end-to-end workflow through the C API") {
  Scratch s;
  REQUIRE(dc_render_scenes((s / "clean").c_str(), 2, 24, 3) == DC_OK);
  dc_synth_options so;
  dc_synth_options_default(&so);
  so.image_size = 24;
  dc_synth_result sr{};
  REQUIRE(dc_synthesize((s / "clean").c_str(), (s / "ds").c_str(), &so, &sr) == DC_OK);
  CHECK(sr.n_samples == 82u);
  CHECK(sr.n_sources == 2u);
  CHECK(sr.n_train + sr.n_test == 82u);

  dc_synth_options bad = so;
  const double overlapping[] = {0.5};
  bad.sigmas_high = overlapping;
  bad.n_sigmas_high = 1;
  bad.sigmas_low = overlapping;
  bad.n_sigmas_low = 1;
  CHECK(dc_synthesize((s / "clean").c_str(), (s / "ds2").c_str(), &bad, &sr) == DC_ERR_INVALID_ARGUMENT);

  dc_model* model = nullptr;
  REQUIRE(dc_model_create("mtl", 42, &model) == DC_OK);
  CHECK(std::string(dc_model_arch(model)) == "mtl");
  dc_train_options to;
  dc_train_options_default(&to);
  CHECK(to.lr == doctest::Approx(1e-4));
  CHECK(to.weight_decay == doctest::Approx(5e-4));
  CHECK(to.batch_size == 32);
  to.epochs = 1;
  const std::string log = s / "train.log";
  to.log_path = log.c_str();
  double acc = -1;
  REQUIRE(dc_model_train(model, (s / "ds/manifest.jsonl").c_str(), &to, &acc) == DC_OK);
  CHECK(acc >= 0.0);
  {
    std::ifstream in(log);
    std::string line;
    REQUIRE(std::getline(in, line));
    const auto j = nlohmann::json::parse(line);
    CHECK(j["epoch"] == 1);
    CHECK(j.contains("mean_loss"));
    CHECK(j.contains("train_accuracy"));
  }
  REQUIRE(dc_model_save(model, (s / "m.dcln").c_str()) == DC_OK);
  dc_model* loaded = nullptr;
  REQUIRE(dc_model_load((s / "m.dcln").c_str(), &loaded) == DC_OK);

  dc_image* img = nullptr;
  REQUIRE(dc_image_load((s / "ds/clean/scene_0000.png").c_str(), &img) == DC_OK);
  int k1 = -1, k2 = -1;
  double p1[DC_NUM_KINDS], p2[DC_NUM_KINDS];
  CHECK(dc_model_identify(model, img, &k1, p1) == DC_OK);
  CHECK(dc_model_identify(loaded, img, &k2, p2) == DC_OK);
  CHECK(k1 == k2);
  for (int i = 0; i < DC_NUM_KINDS; ++i) CHECK(p1[i] == p2[i]);

  dc_pool* pool = nullptr;
  REQUIRE(dc_pool_create(nullptr, &pool) == DC_OK);
  dc_image* restored = nullptr;
  char* trace = nullptr;
  REQUIRE(dc_clean_image(loaded, pool, img, img, 2, 1, &restored, &trace) == DC_OK);
  const auto tj = nlohmann::json::parse(trace);
  CHECK(tj["iterations"].get<int>() <= 2);
  dc_string_free(trace);
  dc_image_free(restored);

  std::size_t n = 0;
  REQUIRE(dc_clean_manifest(loaded, pool, (s / "ds/manifest.jsonl").c_str(), (s / "restored").c_str(), 1, 2, &n) ==
          DC_OK);
  CHECK(n == sr.n_samples);

  dc_eval_options eo;
  dc_eval_options_default(&eo);
  eo.strategies = "oracle,fixed1,fixed2,deepclean";
  char* report = nullptr;
  const dc_status es = dc_evaluate((s / "ds/manifest.jsonl").c_str(), loaded, nullptr, pool, &eo, (s / "rep").c_str(), &report);
  REQUIRE_MESSAGE(es == DC_OK, std::string(dc_last_error()));
  const auto rj = nlohmann::json::parse(report);
  CHECK(rj["strategies"].size() == 4u);
  CHECK(fs::exists(s / "rep.json"));
  CHECK(fs::exists(s / "rep.csv"));
  dc_string_free(report);

  eo.strategies = "hcc";
  CHECK(dc_evaluate((s / "ds/manifest.jsonl").c_str(), loaded, nullptr, pool, &eo, (s / "rep2").c_str(), &report) ==
        DC_ERR_MISSING_MODEL);
  eo.strategies = "hcc";
  CHECK(dc_evaluate((s / "ds/manifest.jsonl").c_str(), loaded, loaded, pool, &eo, (s / "rep2").c_str(), &report) ==
        DC_ERR_INVALID_ARGUMENT);  // an mtl checkpoint in the classifier slot
  eo.strategies = "bogus";
  CHECK(dc_evaluate((s / "ds/manifest.jsonl").c_str(), loaded, nullptr, pool, &eo, (s / "rep2").c_str(), &report) ==
        DC_ERR_INVALID_ARGUMENT);

  dc_pool_free(pool);
  dc_image_free(img);
  dc_model_free(model);
  dc_model_free(loaded);
}

TEST_CASE("checkpoint errors map to distinct codes") {
  Scratch s;
  dc_model* m = nullptr;
  CHECK(dc_model_load((s / "none").c_str(), &m) == DC_ERR_FILE_NOT_FOUND);
  std::ofstream(s / "bad", std::ios::binary) << "NOPE0000000000";
  CHECK(dc_model_load((s / "bad").c_str(), &m) == DC_ERR_BAD_MAGIC);
  CHECK(dc_model_create("vgg", 1, &m) == DC_ERR_INVALID_ARGUMENT);
  CHECK(dc_model_identify(nullptr, nullptr, nullptr, nullptr) == DC_ERR_INVALID_ARGUMENT);
}
