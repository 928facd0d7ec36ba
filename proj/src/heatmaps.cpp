// Copyright Contributors to the EgoScene Project
// SPDX-License-Identifier: Apache-2.0

#include "egoscene/heatmaps.hpp"

#include <algorithm>
#include <cmath>

#include "egoscene/errors.hpp"
#include "egoscene/tensor_io.hpp"

namespace egoscene {

namespace {

// exp underflows to 0 below roughly -745; clamping keeps every voxel
// strictly positive so far-outside joints still yield usable volumes.
constexpr double kMinExponent = -700.0;

}  // namespace

HeatmapVolume render_gaussian_heatmaps(const Pose& pose, const VoxelGridParams& params,
                                       double sigma) {
    params.validate();
    if (!(sigma > 0.0)) throw InvalidSpecError("sigma must be positive");
    HeatmapVolume vol;
    vol.joint_count = pose.size();
    vol.resolution = params.resolution;
    vol.data.resize(static_cast<std::size_t>(vol.joint_count) * vol.voxels_per_joint());

    const double inv_two_sigma2 = 1.0 / (2.0 * sigma * sigma);
    std::size_t i = 0;
    for (int j = 0; j < vol.joint_count; ++j) {
        const Vec3& p = pose.joints[static_cast<std::size_t>(j)];
        for (int x = 0; x < params.resolution; ++x)
            for (int y = 0; y < params.resolution; ++y)
                for (int z = 0; z < params.resolution; ++z, ++i) {
                    const double d2 = (voxel_center(params, x, y, z) - p).squaredNorm();
                    vol.data[i] = std::exp(std::max(-d2 * inv_two_sigma2, kMinExponent));
                }
    }
    return vol;
}

SoftArgmaxResult soft_argmax_detailed(const HeatmapVolume& heatmaps,
                                      const VoxelGridParams& params, double beta) {
    params.validate();
    if (!(beta > 0.0)) throw InvalidSpecError("beta must be positive");
    if (heatmaps.resolution != params.resolution)
        throw ShapeMismatchError("heatmap resolution differs from the grid");

    SoftArgmaxResult out;
    out.pose = make_default_pose();
    if (heatmaps.joint_count != out.pose.size()) {
        out.pose.joint_names.assign(static_cast<std::size_t>(heatmaps.joint_count), "");
        out.pose.joints.assign(static_cast<std::size_t>(heatmaps.joint_count), Vec3::Zero());
    }
    out.peak_weight.assign(static_cast<std::size_t>(heatmaps.joint_count), 0.0);

    const std::size_t n = heatmaps.voxels_per_joint();
    for (int j = 0; j < heatmaps.joint_count; ++j) {
        const double* v = &heatmaps.data[static_cast<std::size_t>(j) * n];
        double vmax = v[0];
        for (std::size_t i = 1; i < n; ++i) vmax = std::max(vmax, v[i]);
        if (!std::isfinite(vmax)) throw InvalidSpecError("non-finite heatmap value");

        double z_sum = 0.0, wmax = 0.0;
        Vec3 acc = Vec3::Zero();
        std::size_t i = 0;
        for (int x = 0; x < params.resolution; ++x)
            for (int y = 0; y < params.resolution; ++y)
                for (int zc = 0; zc < params.resolution; ++zc, ++i) {
                    const double w = std::exp(beta * (v[i] - vmax));
                    z_sum += w;
                    wmax = std::max(wmax, w);
                    acc += w * voxel_center(params, x, y, zc);
                }
        out.pose.joints[static_cast<std::size_t>(j)] = acc / z_sum;
        out.peak_weight[static_cast<std::size_t>(j)] = wmax / z_sum;
    }
    return out;
}

Pose soft_argmax(const HeatmapVolume& heatmaps, const VoxelGridParams& params, double beta) {
    return soft_argmax_detailed(heatmaps, params, beta).pose;
}

std::vector<double> soft_argmax_weights(const HeatmapVolume& heatmaps, int joint,
                                        const VoxelGridParams& params, double beta) {
    const std::size_t n = heatmaps.voxels_per_joint();
    const double* v = &heatmaps.data[static_cast<std::size_t>(joint) * n];
    double vmax = v[0];
    for (std::size_t i = 1; i < n; ++i) vmax = std::max(vmax, v[i]);
    std::vector<double> w(n);
    double z_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = std::exp(beta * (v[i] - vmax));
        z_sum += w[i];
    }
    for (double& wi : w) wi /= z_sum;
    return w;
}

Vec3 soft_argmax_value_gradient(const HeatmapVolume& heatmaps, int joint,
                                std::size_t voxel_linear, const VoxelGridParams& params,
                                double beta) {
    const std::vector<double> w = soft_argmax_weights(heatmaps, joint, params, beta);
    Vec3 pos = Vec3::Zero();
    std::size_t i = 0;
    for (int x = 0; x < params.resolution; ++x)
        for (int y = 0; y < params.resolution; ++y)
            for (int z = 0; z < params.resolution; ++z, ++i) pos += w[i] * voxel_center(params, x, y, z);

    const int res = params.resolution;
    const int vx = static_cast<int>(voxel_linear / (static_cast<std::size_t>(res) * res));
    const int vy = static_cast<int>((voxel_linear / res) % res);
    const int vz = static_cast<int>(voxel_linear % res);
    return beta * w[voxel_linear] * (voxel_center(params, vx, vy, vz) - pos);
}

Tensor to_tensor(const HeatmapVolume& v) {
    const auto n = static_cast<std::uint64_t>(v.resolution);
    return make_tensor_f64({static_cast<std::uint64_t>(v.joint_count), n, n, n}, v.data);
}

HeatmapVolume heatmaps_from_tensor(const Tensor& t) {
    if (t.dims.size() != 4 || t.dims[1] != t.dims[2] || t.dims[2] != t.dims[3])
        throw ShapeMismatchError("heatmap tensor must be J x N x N x N");
    HeatmapVolume v;
    v.joint_count = static_cast<int>(t.dims[0]);
    v.resolution = static_cast<int>(t.dims[1]);
    v.data = tensor_as_f64(t);
    return v;
}

}  // namespace egoscene
