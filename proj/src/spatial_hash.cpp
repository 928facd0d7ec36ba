// Copyright Contributors to the EgoScene Project
// SPDX-License-Identifier: Apache-2.0

#include "egoscene/spatial_hash.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "egoscene/errors.hpp"

namespace egoscene {

SpatialHash::SpatialHash(const PointCloud& points, double cell_size)
    : points_(points), cell_(cell_size) {
    if (!(cell_size > 0.0)) throw InvalidSpecError("spatial hash cell size must be positive");
    cells_.reserve(points_.size());
    bool first = true;
    for (std::uint32_t i = 0; i < points_.size(); ++i) {
        const CellCoord c = cell_of(points_[i]);
        cells_[key_of(c)].push_back(i);
        if (first) {
            bbox_min_ = bbox_max_ = c;
            first = false;
        } else {
            bbox_min_ = {std::min(bbox_min_.x, c.x), std::min(bbox_min_.y, c.y),
                         std::min(bbox_min_.z, c.z)};
            bbox_max_ = {std::max(bbox_max_.x, c.x), std::max(bbox_max_.y, c.y),
                         std::max(bbox_max_.z, c.z)};
        }
    }
}

SpatialHash::CellCoord SpatialHash::cell_of(const Vec3& p) const {
    return {static_cast<std::int64_t>(std::floor(p.x() / cell_)),
            static_cast<std::int64_t>(std::floor(p.y() / cell_)),
            static_cast<std::int64_t>(std::floor(p.z() / cell_))};
}

std::uint64_t SpatialHash::key_of(const CellCoord& c) {
    // 21 bits per axis, offset-binary. Collisions beyond +-2^20 cells alias,
    // which only adds candidates that the exact distance test then rejects.
    const std::uint64_t mask = (1ull << 21) - 1;
    const std::uint64_t x = static_cast<std::uint64_t>(c.x + (1ll << 20)) & mask;
    const std::uint64_t y = static_cast<std::uint64_t>(c.y + (1ll << 20)) & mask;
    const std::uint64_t z = static_cast<std::uint64_t>(c.z + (1ll << 20)) & mask;
    return (x << 42) | (y << 21) | z;
}

bool SpatialHash::any_within(const Vec3& p, double radius) const {
    const double r2 = radius * radius;
    const CellCoord c = cell_of(p);
    for (std::int64_t dz = -1; dz <= 1; ++dz)
        for (std::int64_t dy = -1; dy <= 1; ++dy)
            for (std::int64_t dx = -1; dx <= 1; ++dx) {
                const auto it = cells_.find(key_of({c.x + dx, c.y + dy, c.z + dz}));
                if (it == cells_.end()) continue;
                for (std::uint32_t idx : it->second)
                    if ((points_[idx] - p).squaredNorm() < r2) return true;
            }
    return false;
}

std::optional<std::pair<std::size_t, double>> SpatialHash::nearest(const Vec3& p) const {
    if (points_.empty()) return std::nullopt;
    const CellCoord c = cell_of(p);

    // Chebyshev distance from the query cell to the occupied bounding box
    // lower-bounds the first shell that can contain any point.
    auto axis_gap = [](std::int64_t v, std::int64_t lo, std::int64_t hi) {
        return v < lo ? lo - v : (v > hi ? v - hi : 0);
    };
    const std::int64_t start = std::max({axis_gap(c.x, bbox_min_.x, bbox_max_.x),
                                         axis_gap(c.y, bbox_min_.y, bbox_max_.y),
                                         axis_gap(c.z, bbox_min_.z, bbox_max_.z)});
    const std::int64_t last = std::max({std::abs(c.x - bbox_min_.x), std::abs(c.x - bbox_max_.x),
                                        std::abs(c.y - bbox_min_.y), std::abs(c.y - bbox_max_.y),
                                        std::abs(c.z - bbox_min_.z), std::abs(c.z - bbox_max_.z)});

    std::size_t best_idx = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    auto scan_cell = [&](std::int64_t x, std::int64_t y, std::int64_t z) {
        const auto it = cells_.find(key_of({x, y, z}));
        if (it == cells_.end()) return;
        for (std::uint32_t idx : it->second) {
            const double d2 = (points_[idx] - p).squaredNorm();
            if (d2 < best_d2) {
                best_d2 = d2;
                best_idx = idx;
            }
        }
    };

    for (std::int64_t r = start; r <= last; ++r) {
        if (r == 0) {
            scan_cell(c.x, c.y, c.z);
        } else {
            for (std::int64_t dz = -r; dz <= r; ++dz)
                for (std::int64_t dy = -r; dy <= r; ++dy)
                    for (std::int64_t dx = -r; dx <= r; ++dx) {
                        if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != r) continue;
                        scan_cell(c.x + dx, c.y + dy, c.z + dz);
                    }
        }
        // Any point in shell > r is at least r * cell away from p.
        if (best_d2 <= double(r) * cell_ * double(r) * cell_) break;
    }
    return std::make_pair(best_idx, std::sqrt(best_d2));
}

}  // namespace egoscene
