// Copyright 2026 The DeepClean Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "distortion.hpp"

namespace deepclean {

/// Parameter sets for dataset synthesis. The defaults are the seen (training)
/// values; `unseen()` returns the held-out parameter variant.
struct DatasetConfig {
  std::vector<double> gammas_dark{2.0, 3.0};
  std::vector<double> gammas_bright{0.2, 0.8};
  std::vector<double> sigmas_low{0.04, 0.08};
  std::vector<double> sigmas_high{0.15, 0.2};
  double noise_mean = 0.0;
  std::uint64_t seed = 42;
  int model_input_size = 64;  // clean sources are resized to this square size; 0 keeps native size
  double test_fraction = 0.2;
  bool all_test = false;  // every sample lands in the test split
  int threads = 1;

  static DatasetConfig unseen();
  void validate() const;
  std::size_t variants_per_image() const;
};

enum class Split { Train, Test };

struct SequenceSample {
  std::string id;
  std::filesystem::path clean_path;
  std::filesystem::path distorted_path;
  std::vector<DistortionSpec> sequence;
  DistortionKind label = DistortionKind::Clean;
  Split split = Split::Train;
  std::uint64_t seed = 0;

  friend bool operator==(const SequenceSample&, const SequenceSample&) = default;
};

using Manifest = std::vector<SequenceSample>;

/// Every sequence a single clean image expands into, in emission order:
/// clean, exposure singles, noise singles, then for each (gamma, sigma) the
/// exposure-then-noise and noise-then-exposure pairs.
std::vector<std::vector<DistortionSpec>> enumerate_sequences(const DatasetConfig& config);

struct DatasetSummary {
  Manifest samples;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
};

/// Writes `clean/`, `images/`, `manifest.jsonl`, `train.jsonl` and `test.jsonl`
/// under out_dir. Paths inside manifests are relative to the manifest file.
DatasetSummary generate_dataset(const std::filesystem::path& clean_dir, const std::filesystem::path& out_dir,
                                const DatasetConfig& config);

/// Decodable image files in a directory, sorted by name.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);

// JSON-lines manifest IO. On read, relative paths are resolved against the
// manifest's directory; on write, paths are made relative to it.
void write_manifest(const Manifest& manifest, const std::filesystem::path& path);
Manifest read_manifest(const std::filesystem::path& path);

std::string_view split_name(Split s) noexcept;

}  // namespace deepclean
