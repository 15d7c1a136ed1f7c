// Copyright 2026 The DeepClean Authors
// SPDX-License-Identifier: Apache-2.0

// Checkpoint layout (all integers little-endian):
//   "DCLN" | u32 version | u32 header_len | JSON header
//   per parameter: u16 name_len | name | u8 rank | u32 dims[rank] | f32 data[]

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "json.hpp"
#include "model.hpp"

namespace deepclean {

namespace {

constexpr char kMagic[4] = {'D', 'C', 'L', 'N'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little, "checkpoint IO assumes a little-endian host");

class Writer {
 public:
  template <typename U>
  void put(U v) {
    char buf[sizeof(U)];
    std::memcpy(buf, &v, sizeof(U));
    bytes_.insert(bytes_.end(), buf, buf + sizeof(U));
  }
  void put_bytes(const void* p, std::size_t n) {
    const char* c = static_cast<const char*>(p);
    bytes_.insert(bytes_.end(), c, c + n);
  }
  const std::vector<char>& bytes() const noexcept { return bytes_; }

 private:
  std::vector<char> bytes_;
};

class Reader {
 public:
  explicit Reader(std::vector<char> bytes) : bytes_(std::move(bytes)) {}
  template <typename U>
  U get() {
    U v;
    std::memcpy(&v, take(sizeof(U)), sizeof(U));
    return v;
  }
  const char* take(std::size_t n) {
    if (bytes_.size() - pos_ < n) fail(ErrorCode::Truncated, "checkpoint is truncated");
    const char* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }
  bool at_end() const noexcept { return pos_ == bytes_.size(); }

 private:
  std::vector<char> bytes_;
  std::size_t pos_ = 0;
};

nlohmann::json header_for(const ModelConfig& c) {
  nlohmann::json kinds = nlohmann::json::array();
  for (auto k : kAllKinds) kinds.push_back(kind_name(k));
  return {{"arch", arch_name(c.arch)},   {"input_size", c.input_size}, {"conv_channels", c.conv_channels},
          {"head_dims", c.head_dims},    {"kinds", kinds},             {"seed", c.seed}};
}

}  // namespace

void DistortionModel::save(const std::filesystem::path& path) const {
  Writer w;
  w.put_bytes(kMagic, 4);
  w.put<std::uint32_t>(kVersion);
  const std::string header = header_for(config()).dump();
  w.put<std::uint32_t>(static_cast<std::uint32_t>(header.size()));
  w.put_bytes(header.data(), header.size());
  for (const auto& p : net_.params()) {
    w.put<std::uint16_t>(static_cast<std::uint16_t>(p.name.size()));
    w.put_bytes(p.name.data(), p.name.size());
    w.put<std::uint8_t>(static_cast<std::uint8_t>(p.value.rank()));
    for (int d : p.value.shape()) w.put<std::uint32_t>(static_cast<std::uint32_t>(d));
    w.put_bytes(p.value.data().data(), p.value.size() * sizeof(float));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot write checkpoint " + path.string());
  out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
  if (!out) fail(ErrorCode::Io, "short write to checkpoint " + path.string());
}

DistortionModel DistortionModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::FileNotFound, "cannot open checkpoint " + path.string());
  std::vector<char> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  Reader r(std::move(bytes));

  if (std::memcmp(r.take(4), kMagic, 4) != 0) fail(ErrorCode::BadMagic, "not a checkpoint (bad magic): " + path.string());
  const auto version = r.get<std::uint32_t>();
  if (version != kVersion)
    fail(ErrorCode::VersionMismatch, "checkpoint version " + std::to_string(version) + " is not supported");
  const auto header_len = r.get<std::uint32_t>();
  const char* header_bytes = r.take(header_len);

  ModelConfig config;
  try {
    const auto h = nlohmann::json::parse(header_bytes, header_bytes + header_len);
    const auto kinds = h.at("kinds").get<std::vector<std::string>>();
    bool ordered = kinds.size() == kAllKinds.size();
    for (std::size_t i = 0; ordered && i < kinds.size(); ++i) ordered = kinds[i] == kind_name(kAllKinds[i]);
    if (!ordered) fail(ErrorCode::OrderingMismatch, "checkpoint kind ordering differs from this build");
    config.arch = parse_arch(h.at("arch").get<std::string>());
    config.input_size = h.at("input_size").get<int>();
    config.conv_channels = h.at("conv_channels").get<std::vector<int>>();
    config.head_dims = h.at("head_dims").get<std::vector<int>>();
    config.seed = h.value("seed", std::uint64_t{0});
    config.validate();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::CorruptFormat, std::string("malformed checkpoint header: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::OrderingMismatch) throw;
    fail(ErrorCode::CorruptFormat, std::string("invalid checkpoint header: ") + e.what());
  }

  DistortionModel model(config);
  for (auto& p : model.net_.params()) {
    const auto name_len = r.get<std::uint16_t>();
    const std::string name(r.take(name_len), name_len);
    if (name != p.name) fail(ErrorCode::CorruptFormat, "unexpected parameter '" + name + "', wanted '" + p.name + "'");
    const auto rank = r.get<std::uint8_t>();
    std::vector<int> shape(rank);
    for (auto& d : shape) d = static_cast<int>(r.get<std::uint32_t>());
    if (shape != p.value.shape()) fail(ErrorCode::CorruptFormat, "shape mismatch for parameter " + name);
    std::memcpy(p.value.data().data(), r.take(p.value.size() * sizeof(float)), p.value.size() * sizeof(float));
  }
  if (!r.at_end()) fail(ErrorCode::CorruptFormat, "trailing bytes after the last parameter");
  return model;
}

}  // namespace deepclean
