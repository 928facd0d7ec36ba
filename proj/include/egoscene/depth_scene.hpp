// Copyright Contributors to the EgoScene Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "egoscene/fisheye_camera.hpp"
#include "egoscene/point_cloud.hpp"

namespace egoscene {

/// Per-pixel ray distance in meters (camera center to surface along the
/// pixel ray) with a validity mask. Invalid entries hold 0.
struct DepthMap {
    int width = 0, height = 0;
    std::vector<float> value;
    std::vector<std::uint8_t> valid;

    static DepthMap invalid_map(int width, int height);
    static DepthMap constant(int width, int height, float depth);

    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
    float at(int x, int y) const { return value[index(x, y)]; }
    bool is_valid(int x, int y) const { return valid[index(x, y)] != 0; }
    void set(int x, int y, float v) {
        value[index(x, y)] = v;
        valid[index(x, y)] = 1;
    }
    void set_invalid(int x, int y) {
        value[index(x, y)] = 0.0f;
        valid[index(x, y)] = 0;
    }
    std::size_t valid_count() const;
};

/// Binary body segmentation, 1 = body pixel.
struct SegMask {
    int width = 0, height = 0;
    std::vector<std::uint8_t> mask;

    static SegMask zeros(int width, int height);
    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
    std::uint8_t at(int x, int y) const { return mask[index(x, y)]; }
    void set(int x, int y, std::uint8_t v) { mask[index(x, y)] = v ? 1 : 0; }
    std::size_t count() const;
};

/// One camera-frame point per valid pixel, unprojected at the pixel's ray
/// distance. Pixels whose radius falls outside the fov are skipped too.
PointCloud depth_to_pointcloud(const FisheyeModel& model, const DepthMap& depth);

/// Invalidates body pixels, leaves background pixels untouched.
DepthMap mask_depth(const DepthMap& depth_with_body, const SegMask& seg);

struct InpaintOptions {
    int mask_dilation_px = 2;   // widen the hole to eat segmentation bleed
    double tolerance = 1e-6;    // max-norm residual of the Laplace stencil
    int max_sweeps = 10000;
    double relaxation = 1.8;    // SOR factor, red-black ordering
};

/// Fills the (dilated) mask region by discrete harmonic diffusion with the
/// surrounding valid pixels as Dirichlet boundary. Pixels outside the fill
/// region are returned unchanged; invalid pixels outside the mask stay
/// invalid. Throws EmptyBoundaryError when the map has no valid pixel.
DepthMap inpaint_depth(const DepthMap& masked, const SegMask& seg,
                       const InpaintOptions& options = {});

/// Mean squared depth difference over jointly-valid pixels.
double scene_loss(const DepthMap& pred, const DepthMap& gt);

/// Mean squared difference between the two predictions restricted to valid
/// non-body pixels.
double consistency_loss(const DepthMap& pred_scene, const DepthMap& pred_body,
                        const SegMask& seg);

/// lambda_scene * scene_loss + lambda_consistency * consistency_loss.
double combined_depth_loss(const DepthMap& pred_scene, const DepthMap& gt_scene,
                           const DepthMap& pred_body, const SegMask& seg,
                           double lambda_scene = 1.0, double lambda_consistency = 1.0);

struct DepthMetrics {
    double abs_rel = 0.0;  // mean |pred - gt| / gt
    double rmse = 0.0;     // meters
};

/// Computed over jointly-valid pixels; restrict_to limits the evaluation to
/// mask==1 pixels when given.
DepthMetrics depth_metrics(const DepthMap& pred, const DepthMap& gt,
                           const SegMask* restrict_to = nullptr);

// Interchange formats. 16-bit PGM stores millimeters, 0 = invalid (note the
// quantization); the tensor container keeps full float precision.
void write_depth_pgm16(const std::filesystem::path& path, const DepthMap& depth);
DepthMap read_depth_pgm16(const std::filesystem::path& path);
void write_mask_pgm8(const std::filesystem::path& path, const SegMask& mask);
SegMask read_mask_pgm8(const std::filesystem::path& path);

struct Tensor;
Tensor to_tensor(const DepthMap& depth);
DepthMap depth_from_tensor(const Tensor& t);

}  // namespace egoscene
