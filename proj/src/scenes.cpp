// Copyright 2026 The DeepClean Authors
// SPDX-License-Identifier: Apache-2.0

#include "scenes.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "distortion.hpp"

namespace deepclean {

ImageU8 render_scene(std::uint64_t seed, std::size_t index, int size) {
  require(size >= 4, "scene size must be >= 4");
  Rng rng(derive_seed(seed, "scene/" + std::to_string(index)));
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * u01(rng); };
  using Rgb = std::array<double, 3>;
  auto colour = [&](double lo, double hi) { return Rgb{uniform(lo, hi), uniform(lo, hi), uniform(lo, hi)}; };

  const Rgb c0 = colour(0.15, 0.85);
  const Rgb c1 = colour(0.15, 0.85);
  const double angle = uniform(0.0, 2.0 * std::numbers::pi);
  const double dx = std::cos(angle), dy = std::sin(angle);
  // Projection range of the unit square onto the gradient direction.
  const double t_min = std::min(0.0, dx) + std::min(0.0, dy);
  const double t_max = std::max(0.0, dx) + std::max(0.0, dy);

  std::vector<double> px(static_cast<std::size_t>(size) * size * 3);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double t = ((dx * x + dy * y) / size - t_min) / (t_max - t_min);
      for (int c = 0; c < 3; ++c) px[(y * size + x) * 3 + c] = c0[c] * (1.0 - t) + c1[c] * t;
    }
  }

  const int shapes = 3 + static_cast<int>(rng() % 5);
  for (int s = 0; s < shapes; ++s) {
    const Rgb col = colour(0.08, 0.92);
    const double cx = u01(rng), cy = u01(rng);
    const double ax = uniform(0.05, 0.35), ay = uniform(0.05, 0.35);
    const bool ellipse = u01(rng) < 0.5;
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        const double nx = (x + 0.5) / size, ny = (y + 0.5) / size;
        double m;
        if (ellipse) {
          const double d = std::pow((nx - cx) / ax, 2) + std::pow((ny - cy) / ay, 2);
          m = 1.0 / (1.0 + std::exp(std::min((d - 1.0) * 8.0, 50.0)));
        } else {
          m = (std::abs(nx - cx) < ax && std::abs(ny - cy) < ay) ? 1.0 : 0.0;
        }
        if (m == 0.0) continue;
        for (int c = 0; c < 3; ++c) {
          double& v = px[(y * size + x) * 3 + c];
          v = v * (1.0 - m) + col[c] * m;
        }
      }
    }
  }

  for (int k = 0; k < 3; ++k) {
    const double fx = uniform(2.0, 10.0), fy = uniform(2.0, 10.0), phase = uniform(0.0, 6.3);
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) {
        const double w = 0.03 * std::sin(2.0 * std::numbers::pi * (fx * x + fy * y) / size + phase);
        for (int c = 0; c < 3; ++c) px[(y * size + x) * 3 + c] += w;
      }
  }

  ImageU8 out(size, size, 3);
  auto dst = out.data();
  for (std::size_t i = 0; i < px.size(); ++i) dst[i] = unit_to_byte(px[i]);
  return out;
}

std::vector<std::filesystem::path> write_scenes(const std::filesystem::path& dir, std::size_t count, int size,
                                                std::uint64_t seed) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) fail(ErrorCode::Io, "cannot create directory " + dir.string());
  std::vector<std::filesystem::path> paths;
  for (std::size_t i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "scene_%04zu.png", i);
    paths.push_back(dir / name);
    save_image(render_scene(seed, i, size), paths.back());
  }
  return paths;
}

}  // namespace deepclean
