// Copyright 2026 The DeepClean Authors
// SPDX-License-Identifier: Apache-2.0

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "dataset.hpp"
#include "doctest.h"
#include "scenes.hpp"
#include "test_support.hpp"

using namespace deepclean;
using dctest::TempDir;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

DatasetConfig small_config() {
  DatasetConfig c;
  c.model_input_size = 24;
  return c;
}

}  // namespace

TEST_CASE("enumerate_sequences yields the 41-variant composition") {
  const DatasetConfig c;
  const auto seqs = enumerate_sequences(c);
  REQUIRE(seqs.size() == 41u);
  CHECK(c.variants_per_image() == 41u);
  std::size_t n0 = 0, n1 = 0, n2 = 0;
  for (const auto& s : seqs) (s.empty() ? n0 : s.size() == 1 ? n1 : n2)++;
  CHECK(n0 == 1u);
  CHECK(n1 == 8u);
  CHECK(n2 == 32u);
  std::set<std::pair<int, int>> orders;
  for (const auto& s : seqs)
    if (s.size() == 2) {
      CHECK(is_exposure(s[0].kind) != is_exposure(s[1].kind));
      orders.insert({kind_index(s[0].kind), kind_index(s[1].kind)});
    }
  // both orders of every exposure/noise kind pair
  CHECK(orders.size() == 8u);
}

TEST_CASE("dataset config validation") {
  DatasetConfig c;
  c.sigmas_low = {0.04, 0.2};
  CHECK_THROWS_AS(c.validate(), Error);
  c = DatasetConfig{};
  c.gammas_dark = {0.5};
  CHECK_THROWS_AS(c.validate(), Error);
  c = DatasetConfig{};
  c.gammas_bright = {-0.2};
  CHECK_THROWS_AS(c.validate(), Error);
  c = DatasetConfig{};
  c.sigmas_low = {-0.01};
  CHECK_THROWS_AS(c.validate(), Error);
  const auto u = DatasetConfig::unseen();
  CHECK(u.gammas_dark == std::vector<double>{2.2, 3.2});
  CHECK(u.gammas_bright == std::vector<double>{0.3, 0.9});
  CHECK(u.sigmas_low == std::vector<double>{0.06, 0.1});
  CHECK(u.sigmas_high == std::vector<double>{0.17, 0.25});
  CHECK_NOTHROW(u.validate());
}

TEST_CASE("generate_dataset counts, labels and splits") {
  TempDir dir("ds");
  write_scenes(dir / "clean", 3, 40, 5);
  const auto summary = generate_dataset(dir / "clean", dir / "out", small_config());
  CHECK(summary.samples.size() == 123u);
  CHECK(summary.n_train + summary.n_test == 123u);

  std::map<std::string, std::set<Split>> splits_per_clean;
  std::map<std::string, int> clean_labels;
  for (const auto& s : summary.samples) {
    CHECK(s.label == latest_label(s.sequence));
    CHECK(s.sequence.size() <= 2u);
    CHECK(std::filesystem::exists(s.distorted_path));
    CHECK(std::filesystem::exists(s.clean_path));
    splits_per_clean[s.clean_path.string()].insert(s.split);
    if (s.label == DistortionKind::Clean) clean_labels[s.clean_path.string()]++;
    const auto img = load_image(s.distorted_path);
    CHECK(img.height() == 24);
  }
  CHECK(splits_per_clean.size() == 3u);
  for (const auto& [k, v] : splits_per_clean) CHECK(v.size() == 1u);  // no leakage across splits
  for (const auto& [k, v] : clean_labels) CHECK(v == 1);

  const auto back = read_manifest(dir / "out" / "manifest.jsonl");
  CHECK(back == summary.samples);
  const auto train = read_manifest(dir / "out" / "train.jsonl");
  const auto test = read_manifest(dir / "out" / "test.jsonl");
  CHECK(train.size() == summary.n_train);
  CHECK(test.size() == summary.n_test);
}

TEST_CASE("one clean image gives exactly one clean-labelled sample") {
  TempDir dir("ds1");
  write_scenes(dir / "clean", 1, 32, 1);
  const auto s = generate_dataset(dir / "clean", dir / "out", small_config());
  CHECK(s.samples.size() == 41u);
  CHECK(std::count_if(s.samples.begin(), s.samples.end(),
                      [](const SequenceSample& x) { return x.label == DistortionKind::Clean; }) == 1);
}

TEST_CASE("generate_dataset is deterministic and seed-sensitive only for noise") {
  TempDir dir("dsdet");
  write_scenes(dir / "clean", 2, 32, 9);
  auto c = small_config();
  c.threads = 3;
  const auto a = generate_dataset(dir / "clean", dir / "a", c);
  c.threads = 1;
  const auto b = generate_dataset(dir / "clean", dir / "b", c);
  c.seed = 7;
  const auto other = generate_dataset(dir / "clean", dir / "c", c);
  CHECK(slurp(dir / "a" / "manifest.jsonl") == slurp(dir / "b" / "manifest.jsonl"));
  REQUIRE(a.samples.size() == other.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    const auto& sa = a.samples[i];
    CHECK(slurp(sa.distorted_path) == slurp(b.samples[i].distorted_path));
    const bool has_noise = std::any_of(sa.sequence.begin(), sa.sequence.end(),
                                       [](const DistortionSpec& d) { return is_noise(d.kind); });
    const auto ia = load_image(sa.distorted_path);
    const auto io = load_image(other.samples[i].distorted_path);
    if (has_noise)
      CHECK(ia != io);
    else
      CHECK(ia == io);
  }
}

TEST_CASE("unseen variant places every sample in the test split") {
  TempDir dir("dsu");
  write_scenes(dir / "clean", 2, 32, 3);
  auto c = DatasetConfig::unseen();
  c.model_input_size = 24;
  c.all_test = true;
  const auto s = generate_dataset(dir / "clean", dir / "out", c);
  CHECK(s.n_test == 82u);
  std::set<double> params;
  for (const auto& x : s.samples)
    for (const auto& d : x.sequence) params.insert(d.param);
  CHECK(params == std::set<double>{0.3, 0.9, 2.2, 3.2, 0.06, 0.1, 0.17, 0.25});
}

TEST_CASE("generate_dataset errors") {
  TempDir dir("dserr");
  std::filesystem::create_directories(dir / "empty");
  CHECK_THROWS_AS(generate_dataset(dir / "empty", dir / "out", small_config()), Error);
  CHECK_THROWS_AS(generate_dataset(dir / "missing", dir / "out", small_config()), Error);
  write_scenes(dir / "clean", 1, 16, 1);
  { std::ofstream(dir / "blocker") << "x"; }
  CHECK_THROWS_AS(generate_dataset(dir / "clean", dir / "blocker", small_config()), Error);
}

TEST_CASE("malformed manifest lines are rejected") {
  TempDir dir("man");
  { std::ofstream(dir / "m.jsonl") << "{\"id\": \"x\"}\n"; }
  try {
    read_manifest(dir / "m.jsonl");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CorruptFormat);
  }
  { std::ofstream(dir / "bad.jsonl") << "not json\n"; }
  CHECK_THROWS_AS(read_manifest(dir / "bad.jsonl"), Error);
  CHECK_THROWS_AS(read_manifest(dir / "none.jsonl"), Error);
}

TEST_CASE("scenes are deterministic and varied") {
  CHECK(render_scene(1, 0, 32) == render_scene(1, 0, 32));
  CHECK(render_scene(1, 0, 32) != render_scene(1, 1, 32));
  CHECK(render_scene(1, 0, 32) != render_scene(2, 0, 32));
}
