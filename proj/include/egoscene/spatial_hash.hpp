// Copyright Contributors to the EgoScene Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "egoscene/point_cloud.hpp"
#include "egoscene/types.hpp"

namespace egoscene {

/// Uniform spatial hash over a point cloud. Cells are cubes of a fixed side;
/// any point within `cell_size` of a query position is guaranteed to live in
/// the 3x3x3 block of cells around it, which bounds neighbor searches to 27
/// cell lookups. Immutable after construction.
class SpatialHash {
public:
    SpatialHash(const PointCloud& points, double cell_size);

    double cell_size() const { return cell_; }
    std::size_t point_count() const { return points_.size(); }
    bool empty() const { return points_.empty(); }

    /// True iff some point lies strictly within `radius` of `p`.
    /// Requires radius <= cell_size (the 27-cell guarantee).
    bool any_within(const Vec3& p, double radius) const;

    /// Index and Euclidean distance of the nearest point, nullopt when empty.
    /// Exact for any query; uses expanding shell search.
    std::optional<std::pair<std::size_t, double>> nearest(const Vec3& p) const;

    const Vec3& point(std::size_t i) const { return points_[i]; }

private:
    struct CellCoord {
        std::int64_t x, y, z;
    };
    CellCoord cell_of(const Vec3& p) const;
    static std::uint64_t key_of(const CellCoord& c);

    std::vector<Vec3> points_;
    double cell_ = 0.0;
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> cells_;
    CellCoord bbox_min_{0, 0, 0};
    CellCoord bbox_max_{0, 0, 0};
};

}  // namespace egoscene
