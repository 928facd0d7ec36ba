// Copyright Contributors to the EgoScene Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <vector>

#include "egoscene/depth_scene.hpp"
#include "egoscene/heatmaps.hpp"
#include "egoscene/pose.hpp"
#include "egoscene/voxel_grid.hpp"

namespace egoscene {

/// Pluggable volume-to-heatmaps stage. The feature volume is null when the
/// pipeline runs without a 2D feature map.
using VolumeToHeatmaps =
    std::function<HeatmapVolume(const FeatureVolume*, const OccupancyVolume&)>;

struct PipelineConfig {
    VoxelGridParams grid;
    double sigma = 0.05;  // Gaussian oracle scale, meters
    double beta = 200.0;  // soft-argmax temperature
};

struct PipelineInputs {
    const FeatureMap* features = nullptr;   // optional 2D feature map
    const Pose* oracle_pose = nullptr;      // drives the built-in heatmap oracle
    const DepthMap* scene_depth = nullptr;  // optional scene branch
};

struct PipelineDiagnostics {
    std::size_t occupied_voxels = 0;
    std::size_t valid_projections = 0;
    std::vector<double> peak_sharpness;         // max softmax weight per joint
    std::vector<std::uint8_t> out_of_volume;    // oracle joints outside the box
};

struct PipelineResult {
    Pose pose;
    PipelineDiagnostics diagnostics;
};

/// Geometric pipeline: lift 2D features into the voxel grid, voxelize the
/// scene depth's point cloud, run the heatmap stage, and read the pose out
/// with soft-argmax. When no stage is supplied, the Gaussian oracle around
/// `oracle_pose` is used (it ignores the scene volume, like a perfectly
/// trained predictor would not).
PipelineResult run_pipeline(const FisheyeModel& model, const PipelineInputs& inputs,
                            const PipelineConfig& config, VolumeToHeatmaps stage = {});

/// Concatenates the occupancy volume as one extra channel after the feature
/// channels; the default merge for stages that want a single input volume.
FeatureVolume concat_occupancy(const FeatureVolume& features, const OccupancyVolume& occupancy);

}  // namespace egoscene
