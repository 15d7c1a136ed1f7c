// Copyright 2026 The DeepClean Authors
// SPDX-License-Identifier: Apache-2.0

#include "dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>

#include "json.hpp"
#include "parallel.hpp"

namespace deepclean {

namespace fs = std::filesystem;
using nlohmann::json;

DatasetConfig DatasetConfig::unseen() {
  DatasetConfig c;
  c.gammas_dark = {2.2, 3.2};
  c.gammas_bright = {0.3, 0.9};
  c.sigmas_low = {0.06, 0.1};
  c.sigmas_high = {0.17, 0.25};
  return c;
}

void DatasetConfig::validate() const {
  for (double g : gammas_dark) require(g > 1.0 && std::isfinite(g), "dark gammas must be > 1");
  for (double g : gammas_bright) require(g > 0.0 && g < 1.0, "bright gammas must lie in (0, 1)");
  for (double s : sigmas_low) require(s >= 0.0 && std::isfinite(s), "sigmas must be >= 0");
  for (double s : sigmas_high) require(s >= 0.0 && std::isfinite(s), "sigmas must be >= 0");
  if (!sigmas_low.empty() && !sigmas_high.empty()) {
    require(*std::max_element(sigmas_low.begin(), sigmas_low.end()) <
                *std::min_element(sigmas_high.begin(), sigmas_high.end()),
            "every low sigma must be below every high sigma");
  }
  require(std::isfinite(noise_mean), "noise mean must be finite");
  require(model_input_size >= 0, "model input size must be >= 0");
  require(test_fraction >= 0.0 && test_fraction <= 1.0, "test fraction must lie in [0, 1]");
}

std::size_t DatasetConfig::variants_per_image() const {
  const std::size_t ng = gammas_dark.size() + gammas_bright.size();
  const std::size_t ns = sigmas_low.size() + sigmas_high.size();
  return 1 + ng + ns + 2 * ng * ns;
}

std::vector<std::vector<DistortionSpec>> enumerate_sequences(const DatasetConfig& config) {
  std::vector<DistortionSpec> exposures;
  for (double g : config.gammas_bright) exposures.push_back({classify_gamma(g), g});
  for (double g : config.gammas_dark) exposures.push_back({classify_gamma(g), g});
  std::vector<DistortionSpec> noises;
  for (double s : config.sigmas_low) noises.push_back({DistortionKind::NoiseLow, s});
  for (double s : config.sigmas_high) noises.push_back({DistortionKind::NoiseHigh, s});

  std::vector<std::vector<DistortionSpec>> out;
  out.push_back({});
  for (const auto& e : exposures) out.push_back({e});
  for (const auto& n : noises) out.push_back({n});
  for (const auto& e : exposures) {
    for (const auto& n : noises) {
      out.push_back({e, n});
      out.push_back({n, e});
    }
  }
  return out;
}

std::string_view split_name(Split s) noexcept { return s == Split::Train ? "train" : "test"; }

std::vector<fs::path> list_images(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) fail(ErrorCode::FileNotFound, "not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

std::string format_param(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string sequence_tag(const std::vector<DistortionSpec>& seq) {
  if (seq.empty()) return "clean";
  std::string tag;
  for (const auto& s : seq) {
    if (!tag.empty()) tag += "-";
    tag += (is_exposure(s.kind) ? "g" : "s") + format_param(s.param);
  }
  return tag;
}

// Splits at the clean-image level: sources are ranked by a seeded hash and the
// first round(n * test_fraction) go to the test split.
std::vector<Split> assign_splits(const std::vector<std::string>& stems, const DatasetConfig& config) {
  std::vector<Split> splits(stems.size(), Split::Train);
  if (config.all_test) {
    std::fill(splits.begin(), splits.end(), Split::Test);
    return splits;
  }
  std::vector<std::size_t> order(stems.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::uint64_t> keys(stems.size());
  for (std::size_t i = 0; i < stems.size(); ++i) keys[i] = derive_seed(config.seed, "split/" + stems[i]);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return keys[a] != keys[b] ? keys[a] < keys[b] : stems[a] < stems[b];
  });
  const auto n_test = static_cast<std::size_t>(std::lround(config.test_fraction * stems.size()));
  for (std::size_t r = 0; r < n_test && r < order.size(); ++r) splits[order[r]] = Split::Test;
  return splits;
}

fs::path relative_to(const fs::path& p, const fs::path& base) {
  std::error_code ec;
  const fs::path rel = fs::relative(fs::absolute(p), fs::absolute(base), ec);
  return ec || rel.empty() ? p : rel;
}

}  // namespace

DatasetSummary generate_dataset(const fs::path& clean_dir, const fs::path& out_dir, const DatasetConfig& config) {
  config.validate();
  const auto sources = list_images(clean_dir);
  if (sources.empty()) fail(ErrorCode::InvalidArgument, "no decodable images in " + clean_dir.string());

  std::error_code ec;
  fs::create_directories(out_dir / "images", ec);
  fs::create_directories(out_dir / "clean", ec);
  if (ec || !fs::is_directory(out_dir / "images"))
    fail(ErrorCode::Io, "cannot create output directory " + out_dir.string());

  std::vector<std::string> stems;
  for (const auto& p : sources) stems.push_back(p.stem().string());
  if (std::set<std::string>(stems.begin(), stems.end()).size() != stems.size())
    fail(ErrorCode::InvalidArgument, "clean images must have unique file stems");
  const auto splits = assign_splits(stems, config);
  const auto sequences = enumerate_sequences(config);

  std::vector<Manifest> per_image(sources.size());
  parallel_for(sources.size(), config.threads, [&](std::size_t i) {
    ImageU8 clean = load_image(sources[i]);
    if (config.model_input_size > 0)
      clean = resize_bilinear(clean, config.model_input_size, config.model_input_size);
    const fs::path clean_out = out_dir / "clean" / (stems[i] + ".png");
    save_image(clean, clean_out);

    Manifest& samples = per_image[i];
    for (std::size_t v = 0; v < sequences.size(); ++v) {
      char idx[8];
      std::snprintf(idx, sizeof idx, "%02zu", v);
      SequenceSample s;
      s.id = stems[i] + "__" + idx + "_" + sequence_tag(sequences[v]);
      s.sequence = sequences[v];
      s.label = latest_label(s.sequence);
      s.split = splits[i];
      s.seed = derive_seed(config.seed, s.id);
      s.clean_path = clean_out;
      s.distorted_path = out_dir / "images" / (s.id + ".png");

      Rng rng(s.seed);
      ImageU8 distorted = clean;
      for (const auto& spec : s.sequence) {
        distorted = is_exposure(spec.kind) ? apply_gamma(distorted, spec.param, 1.0)
                                           : apply_gaussian_noise(distorted, config.noise_mean, spec.param, rng);
      }
      save_image(distorted, s.distorted_path);
      samples.push_back(std::move(s));
    }
  });

  DatasetSummary summary;
  Manifest train, test;
  for (auto& samples : per_image) {
    for (auto& s : samples) {
      (s.split == Split::Train ? train : test).push_back(s);
      summary.samples.push_back(std::move(s));
    }
  }
  summary.n_train = train.size();
  summary.n_test = test.size();
  write_manifest(summary.samples, out_dir / "manifest.jsonl");
  write_manifest(train, out_dir / "train.jsonl");
  write_manifest(test, out_dir / "test.jsonl");
  return summary;
}

void write_manifest(const Manifest& manifest, const fs::path& path) {
  const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot write manifest " + path.string());
  for (const auto& s : manifest) {
    json seq = json::array();
    for (const auto& spec : s.sequence) seq.push_back({{"kind", kind_name(spec.kind)}, {"param", spec.param}});
    json rec = {{"id", s.id},
                {"clean_path", relative_to(s.clean_path, base).generic_string()},
                {"distorted_path", relative_to(s.distorted_path, base).generic_string()},
                {"sequence", seq},
                {"label", kind_name(s.label)},
                {"split", split_name(s.split)},
                {"seed", s.seed}};
    out << rec.dump() << '\n';
  }
  if (!out) fail(ErrorCode::Io, "short write to manifest " + path.string());
}

Manifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::FileNotFound, "cannot open manifest " + path.string());
  const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
  auto resolve = [&](const std::string& p) {
    fs::path q(p);
    return q.is_absolute() ? q : (base / q).lexically_normal();
  };
  Manifest manifest;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json rec = json::parse(line);
      SequenceSample s;
      s.id = rec.at("id").get<std::string>();
      s.clean_path = resolve(rec.at("clean_path").get<std::string>());
      s.distorted_path = resolve(rec.at("distorted_path").get<std::string>());
      for (const auto& e : rec.at("sequence")) {
        DistortionSpec spec{parse_kind(e.at("kind").get<std::string>()), e.at("param").get<double>()};
        spec.validate();
        s.sequence.push_back(spec);
      }
      s.label = parse_kind(rec.at("label").get<std::string>());
      const auto split = rec.at("split").get<std::string>();
      require(split == "train" || split == "test", "split must be train or test");
      s.split = split == "train" ? Split::Train : Split::Test;
      s.seed = rec.value("seed", std::uint64_t{0});
      require(s.sequence.size() <= 2, "sequences hold at most two distortions");
      require(s.label == latest_label(s.sequence), "label does not match the latest distortion");
      manifest.push_back(std::move(s));
    } catch (const json::exception& e) {
      fail(ErrorCode::CorruptFormat,
           "malformed manifest record at " + path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      fail(ErrorCode::CorruptFormat,
           "invalid manifest record at " + path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return manifest;
}

}  // namespace deepclean
