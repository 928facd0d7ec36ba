// Copyright Contributors to the EgoScene Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "egoscene/fisheye_camera.hpp"
#include "egoscene/point_cloud.hpp"
#include "egoscene/types.hpp"

namespace egoscene {

/// Cubic volume of side `side_length` under the camera. The camera sits at
/// the center of the top face: the box spans [-side/2, side/2] in x and y
/// and [0, side] in z (camera frame). `resolution` voxels per side.
///
/// Voxel index (x, y, z) has its center at
///     (x*side/res - side/2, y*side/res - side/2, z*side/res)
/// which puts index 0 exactly on the box face; the far face at index res
/// would lie one cell beyond the last center. The asymmetry is deliberate
/// and shared by every consumer of the grid.
struct VoxelGridParams {
    double side_length = 2.4;  // meters
    int resolution = 64;       // voxels per side
    double epsilon = 0.04;     // occupancy threshold distance, meters

    void validate() const;
    double cell_size() const { return side_length / resolution; }
    std::size_t voxel_count() const {
        return static_cast<std::size_t>(resolution) * resolution * resolution;
    }
    std::size_t linear_index(int x, int y, int z) const {
        return (static_cast<std::size_t>(x) * resolution + y) * resolution + z;
    }
};

inline Vec3 voxel_center(const VoxelGridParams& p, int x, int y, int z) {
    const double s = p.side_length / p.resolution;
    return Vec3(x * s - p.side_length / 2.0, y * s - p.side_length / 2.0, z * s);
}

/// Dense grid of voxel-center coordinates, camera frame, meters.
struct CoordinateVolume {
    int resolution = 0;
    std::vector<Vec3> centers;  // x-major, z fastest

    const Vec3& at(int x, int y, int z) const {
        return centers[(static_cast<std::size_t>(x) * resolution + y) * resolution + z];
    }
};

CoordinateVolume voxel_centers(const VoxelGridParams& params);

/// Per-voxel projected pixel and validity. Voxels that are out of the
/// camera's field of view or project degenerately are flagged invalid.
struct ProjectedVoxels {
    int resolution = 0;
    std::vector<Vec2> pixel;
    std::vector<std::uint8_t> valid;
};

ProjectedVoxels project_voxels(const FisheyeModel& model, const CoordinateVolume& centers);

/// Row-major H x W x K feature map (y, x, channel).
struct FeatureMap {
    int height = 0, width = 0, channels = 0;
    std::vector<float> data;

    float at(int y, int x, int k) const {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + k];
    }
    float& at(int y, int x, int k) {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + k];
    }
    static FeatureMap zeros(int height, int width, int channels);
};

/// N^3 x K feature grid (x-major, z, then channel fastest).
struct FeatureVolume {
    int resolution = 0, channels = 0;
    std::vector<float> data;

    float at(int x, int y, int z, int k) const {
        return data[((static_cast<std::size_t>(x) * resolution + y) * resolution + z) * channels +
                    k];
    }
};

/// Bilinear sampling of the feature map at each voxel's projected pixel.
/// Invalid voxels and pixels beyond the border half-cell give zeros; pixels
/// within the border half-cell clamp to the edge sample.
FeatureVolume lift_features(const FeatureMap& features, const ProjectedVoxels& projected);

/// Binary N^3 occupancy grid (x-major, z fastest).
struct OccupancyVolume {
    int resolution = 0;
    std::vector<std::uint8_t> occupied;

    std::uint8_t at(int x, int y, int z) const {
        return occupied[(static_cast<std::size_t>(x) * resolution + y) * resolution + z];
    }
    std::size_t count() const;
};

/// Voxel is set iff some cloud point lies strictly within `epsilon` of its
/// center. Spatial-hash accelerated; bitwise identical to the brute-force
/// reference below.
OccupancyVolume voxelize_points(const PointCloud& cloud, const VoxelGridParams& params);

/// Literal O(N^3 * M) reference evaluation of the same predicate.
OccupancyVolume voxelize_points_bruteforce(const PointCloud& cloud,
                                           const VoxelGridParams& params);

// Tensor container bridges.
struct Tensor;
Tensor to_tensor(const OccupancyVolume& v);
Tensor to_tensor(const FeatureVolume& v);
OccupancyVolume occupancy_from_tensor(const Tensor& t);
FeatureVolume feature_volume_from_tensor(const Tensor& t);

}  // namespace egoscene
