// Copyright 2026 The DeepClean Authors
// SPDX-License-Identifier: Apache-2.0

#include "imaging.hpp"

#include <algorithm>
#include <cmath>

namespace deepclean {

ImageF32 to_unit(const ImageU8& img) {
  ImageF32 out(img.height(), img.width(), img.channels());
  auto src = img.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = static_cast<float>(src[i]) / 255.0f;
  return out;
}

std::uint8_t unit_to_byte(double v) noexcept {
  if (!(v > 0.0)) return 0;  // also maps NaN to 0
  if (v >= 1.0) return 255;
  return static_cast<std::uint8_t>(std::round(v * 255.0));
}

ImageU8 from_unit(const ImageF32& img) {
  ImageU8 out(img.height(), img.width(), img.channels());
  auto src = img.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = unit_to_byte(src[i]);
  return out;
}

ImageU8 resize_bilinear(const ImageU8& img, int out_h, int out_w) {
  require(out_h >= 1 && out_w >= 1, "resize target must be at least 1x1");
  if (out_h == img.height() && out_w == img.width()) return img;

  struct Tap {
    int lo, hi;
    double frac;
  };
  auto taps = [](int in, int out) {
    std::vector<Tap> t(out);
    const double scale = static_cast<double>(in) / out;
    for (int i = 0; i < out; ++i) {
      double src = (i + 0.5) * scale - 0.5;
      src = std::clamp(src, 0.0, static_cast<double>(in - 1));
      const int lo = static_cast<int>(std::floor(src));
      const int hi = std::min(lo + 1, in - 1);
      t[i] = {lo, hi, src - lo};
    }
    return t;
  };
  const auto ys = taps(img.height(), out_h);
  const auto xs = taps(img.width(), out_w);

  const int c = img.channels();
  ImageU8 out(out_h, out_w, c);
  for (int y = 0; y < out_h; ++y) {
    const Tap& ty = ys[y];
    for (int x = 0; x < out_w; ++x) {
      const Tap& tx = xs[x];
      for (int ch = 0; ch < c; ++ch) {
        const double top = img.at(ty.lo, tx.lo, ch) * (1.0 - tx.frac) + img.at(ty.lo, tx.hi, ch) * tx.frac;
        const double bottom = img.at(ty.hi, tx.lo, ch) * (1.0 - tx.frac) + img.at(ty.hi, tx.hi, ch) * tx.frac;
        const double v = top * (1.0 - ty.frac) + bottom * ty.frac;
        out.at(y, x, ch) = static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0));
      }
    }
  }
  return out;
}

ImageU8 to_rgb(const ImageU8& img) {
  if (img.channels() == 3) return img;
  ImageU8 out(img.height(), img.width(), 3);
  auto src = img.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[3 * i] = dst[3 * i + 1] = dst[3 * i + 2] = src[i];
  return out;
}

double mse(const ImageU8& a, const ImageU8& b) {
  if (!a.same_shape(b)) fail(ErrorCode::DimensionMismatch, "mse: image dimensions differ");
  auto da = a.data();
  auto db = b.data();
  std::uint64_t acc = 0;
  for (std::size_t i = 0; i < da.size(); ++i) {
    const int d = static_cast<int>(da[i]) - static_cast<int>(db[i]);
    acc += static_cast<std::uint64_t>(d * d);
  }
  return static_cast<double>(acc) / static_cast<double>(da.size());
}

double psnr(const ImageU8& a, const ImageU8& b) {
  const double m = mse(a, b);
  if (m == 0.0) return kPsnrInfinity;
  return 10.0 * std::log10(255.0 * 255.0 / m);
}

}  // namespace deepclean
