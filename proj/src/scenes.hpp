// Copyright 2026 The DeepClean Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "imaging.hpp"

namespace deepclean {

/// Procedural clean RGB scene: a two-colour gradient backdrop, a handful of
/// soft-edged ellipses and rectangles, and a faint sinusoidal texture.
/// Deterministic in (seed, index). Intensities stay clear of 0 and 255 so
/// exposure round trips are not dominated by clipping.
ImageU8 render_scene(std::uint64_t seed, std::size_t index, int size);

/// Writes `count` scenes as scene_0000.png, scene_0001.png, ... into dir.
std::vector<std::filesystem::path> write_scenes(const std::filesystem::path& dir, std::size_t count, int size,
                                                std::uint64_t seed);

}  // namespace deepclean
