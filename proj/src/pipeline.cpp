// Copyright Contributors to the EgoScene Project
// SPDX-License-Identifier: Apache-2.0

#include "egoscene/pipeline.hpp"

#include "egoscene/errors.hpp"

namespace egoscene {

PipelineResult run_pipeline(const FisheyeModel& model, const PipelineInputs& inputs,
                            const PipelineConfig& config, VolumeToHeatmaps stage) {
    config.grid.validate();
    if (!stage && !inputs.oracle_pose)
        throw InvalidSpecError("pipeline needs a heatmap stage or an oracle pose");

    PipelineResult result;

    // 2D feature branch.
    FeatureVolume body_volume;
    const FeatureVolume* body_ptr = nullptr;
    if (inputs.features) {
        const CoordinateVolume centers = voxel_centers(config.grid);
        const ProjectedVoxels projected = project_voxels(model, centers);
        for (std::uint8_t v : projected.valid) result.diagnostics.valid_projections += v;
        body_volume = lift_features(*inputs.features, projected);
        body_ptr = &body_volume;
    }

    // Scene branch.
    OccupancyVolume scene_volume;
    scene_volume.resolution = config.grid.resolution;
    scene_volume.occupied.assign(config.grid.voxel_count(), 0);
    if (inputs.scene_depth) {
        const PointCloud cloud = depth_to_pointcloud(model, *inputs.scene_depth);
        scene_volume = voxelize_points(cloud, config.grid);
    }
    result.diagnostics.occupied_voxels = scene_volume.count();

    HeatmapVolume heatmaps;
    if (stage) {
        heatmaps = stage(body_ptr, scene_volume);
    } else {
        heatmaps = render_gaussian_heatmaps(*inputs.oracle_pose, config.grid, config.sigma);
    }

    const SoftArgmaxResult readout = soft_argmax_detailed(heatmaps, config.grid, config.beta);
    result.pose = readout.pose;
    result.diagnostics.peak_sharpness = readout.peak_weight;

    if (inputs.oracle_pose) {
        const double half = config.grid.side_length / 2.0;
        for (const Vec3& p : inputs.oracle_pose->joints) {
            const bool outside = std::abs(p.x()) > half || std::abs(p.y()) > half ||
                                 p.z() < 0.0 || p.z() > config.grid.side_length;
            result.diagnostics.out_of_volume.push_back(outside ? 1 : 0);
        }
    }
    return result;
}

FeatureVolume concat_occupancy(const FeatureVolume& features, const OccupancyVolume& occupancy) {
    if (features.resolution != occupancy.resolution)
        throw ShapeMismatchError("volume resolutions differ");
    FeatureVolume out;
    out.resolution = features.resolution;
    out.channels = features.channels + 1;
    const std::size_t n = occupancy.occupied.size();
    out.data.resize(n * out.channels);
    for (std::size_t i = 0; i < n; ++i) {
        for (int k = 0; k < features.channels; ++k)
            out.data[i * out.channels + k] = features.data[i * features.channels + k];
        out.data[i * out.channels + features.channels] = float(occupancy.occupied[i]);
    }
    return out;
}

}  // namespace egoscene
