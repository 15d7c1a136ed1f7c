// Copyright 2026 The DeepClean Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <vector>

#include "error.hpp"

namespace deepclean {

/// Row-major, channel-interleaved raster with 1 or 3 channels.
template <typename T>
class Image {
 public:
  using value_type = T;

  Image() = default;
  Image(int height, int width, int channels, T fill = T{})
      : height_(height), width_(width), channels_(channels) {
    validate_shape(height, width, channels);
    data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
  }
  Image(int height, int width, int channels, std::vector<T> data)
      : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
    validate_shape(height, width, channels);
    if (data_.size() != static_cast<std::size_t>(height) * width * channels)
      fail(ErrorCode::DimensionMismatch, "image data length does not match height*width*channels");
  }

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  int channels() const noexcept { return channels_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }

  T& at(int y, int x, int c) noexcept { return data_[index(y, x, c)]; }
  const T& at(int y, int x, int c) const noexcept { return data_[index(y, x, c)]; }

  bool same_shape(const Image& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_ && channels_ == other.channels_;
  }
  template <typename U>
  bool same_shape(const Image<U>& other) const noexcept {
    return height_ == other.height() && width_ == other.width() && channels_ == other.channels();
  }

  friend bool operator==(const Image& a, const Image& b) {
    return a.same_shape(b) && a.data_ == b.data_;
  }

 private:
  static void validate_shape(int h, int w, int c) {
    if (h < 1 || w < 1) fail(ErrorCode::InvalidArgument, "image height and width must be >= 1");
    if (c != 1 && c != 3) fail(ErrorCode::InvalidArgument, "image channels must be 1 or 3");
  }
  std::size_t index(int y, int x, int c) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<T> data_;
};

using ImageU8 = Image<std::uint8_t>;
using ImageF32 = Image<float>;

/// Byte to unit interval: value / 255.
ImageF32 to_unit(const ImageU8& img);

/// Clamps to [0, 1], scales by 255 and rounds half away from zero.
ImageU8 from_unit(const ImageF32& img);

/// Single-sample form of from_unit, shared by every pixel transform.
std::uint8_t unit_to_byte(double v) noexcept;

/// Center-aligned bilinear resampling with clamped edges.
ImageU8 resize_bilinear(const ImageU8& img, int out_h, int out_w);

/// Replicates a single channel into three; three-channel input is returned as is.
ImageU8 to_rgb(const ImageU8& img);

double mse(const ImageU8& a, const ImageU8& b);

/// 10*log10(255^2 / mse) with a fixed byte-domain peak; +inf for identical images.
double psnr(const ImageU8& a, const ImageU8& b);

inline constexpr double kPsnrInfinity = std::numeric_limits<double>::infinity();

// Codecs. Formats are detected from file content on load and from the
// extension on save (.png, .jpg, .jpeg).
ImageU8 load_image(const std::filesystem::path& path);
void save_image(const ImageU8& img, const std::filesystem::path& path, int jpeg_quality = 95);

}  // namespace deepclean
