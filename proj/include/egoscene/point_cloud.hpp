// Copyright Contributors to the EgoScene Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <vector>

#include "egoscene/types.hpp"

namespace egoscene {

using PointCloud = std::vector<Vec3>;

/// ASCII PLY with double x/y/z vertex properties.
void write_ply(const std::filesystem::path& path, const PointCloud& cloud);

/// Reads ASCII PLY; accepts float or double x/y/z in any property order and
/// ignores extra vertex properties.
PointCloud read_ply(const std::filesystem::path& path);

}  // namespace egoscene
