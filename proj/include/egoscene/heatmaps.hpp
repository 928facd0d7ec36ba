// Copyright Contributors to the EgoScene Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "egoscene/pose.hpp"
#include "egoscene/voxel_grid.hpp"

namespace egoscene {

/// Per-joint non-negative score volumes over the voxel grid
/// (joint-major, then x, y, z fastest-last).
struct HeatmapVolume {
    int joint_count = 0;
    int resolution = 0;
    std::vector<double> data;

    std::size_t voxels_per_joint() const {
        return static_cast<std::size_t>(resolution) * resolution * resolution;
    }
    double at(int j, int x, int y, int z) const {
        return data[j * voxels_per_joint() +
                    (static_cast<std::size_t>(x) * resolution + y) * resolution + z];
    }
    double& at(int j, int x, int y, int z) {
        return data[j * voxels_per_joint() +
                    (static_cast<std::size_t>(x) * resolution + y) * resolution + z];
    }
};

/// Unnormalized isotropic Gaussian of scale `sigma` around each joint,
/// evaluated at the voxel centers. Peak value 1 at a joint that coincides
/// with a center. Stands in for a learned volume-to-heatmap stage.
HeatmapVolume render_gaussian_heatmaps(const Pose& pose, const VoxelGridParams& params,
                                       double sigma);

struct SoftArgmaxResult {
    Pose pose;
    /// Largest softmax weight per joint; 1 means a single dominant voxel.
    std::vector<double> peak_weight;
};

/// Differentiable readout: per joint, softmax(beta * values) over all voxels,
/// then the weighted sum of voxel centers. Stabilized by max subtraction.
/// The result always lies in the convex hull of the voxel centers.
SoftArgmaxResult soft_argmax_detailed(const HeatmapVolume& heatmaps,
                                      const VoxelGridParams& params, double beta);

Pose soft_argmax(const HeatmapVolume& heatmaps, const VoxelGridParams& params, double beta);

/// Softmax weights of one joint's volume (linear voxel order), mainly for
/// inspection and tests.
std::vector<double> soft_argmax_weights(const HeatmapVolume& heatmaps, int joint,
                                        const VoxelGridParams& params, double beta);

/// Analytic d(position)/d(value at one voxel):
///     beta * w_v * (center_v - position).
Vec3 soft_argmax_value_gradient(const HeatmapVolume& heatmaps, int joint,
                                std::size_t voxel_linear, const VoxelGridParams& params,
                                double beta);

Tensor to_tensor(const HeatmapVolume& v);
HeatmapVolume heatmaps_from_tensor(const Tensor& t);

}  // namespace egoscene
