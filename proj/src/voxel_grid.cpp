// Copyright Contributors to the EgoScene Project
// SPDX-License-Identifier: Apache-2.0

#include "egoscene/voxel_grid.hpp"

#include <algorithm>
#include <cmath>

#include "egoscene/errors.hpp"
#include "egoscene/spatial_hash.hpp"
#include "egoscene/tensor_io.hpp"

namespace egoscene {

void VoxelGridParams::validate() const {
    if (!(side_length > 0.0)) throw InvalidSpecError("voxel grid side must be positive");
    if (resolution < 2) throw InvalidSpecError("voxel grid needs at least 2 voxels per side");
    if (!(epsilon > 0.0 && epsilon < side_length))
        throw InvalidSpecError("occupancy epsilon must lie in (0, side_length)");
}

CoordinateVolume voxel_centers(const VoxelGridParams& params) {
    params.validate();
    CoordinateVolume vol;
    vol.resolution = params.resolution;
    vol.centers.resize(params.voxel_count());
    std::size_t i = 0;
    for (int x = 0; x < params.resolution; ++x)
        for (int y = 0; y < params.resolution; ++y)
            for (int z = 0; z < params.resolution; ++z) vol.centers[i++] = voxel_center(params, x, y, z);
    return vol;
}

ProjectedVoxels project_voxels(const FisheyeModel& model, const CoordinateVolume& centers) {
    ProjectedVoxels out;
    out.resolution = centers.resolution;
    out.pixel.resize(centers.centers.size(), Vec2::Zero());
    out.valid.resize(centers.centers.size(), 0);
    for (std::size_t i = 0; i < centers.centers.size(); ++i) {
        if (auto px = model.try_project(centers.centers[i])) {
            out.pixel[i] = *px;
            out.valid[i] = 1;
        }
    }
    return out;
}

FeatureMap FeatureMap::zeros(int height, int width, int channels) {
    FeatureMap f;
    f.height = height;
    f.width = width;
    f.channels = channels;
    f.data.assign(static_cast<std::size_t>(height) * width * channels, 0.0f);
    return f;
}

FeatureVolume lift_features(const FeatureMap& features, const ProjectedVoxels& projected) {
    if (features.height <= 0 || features.width <= 0 || features.channels <= 0)
        throw ShapeMismatchError("empty feature map");
    if (projected.pixel.size() != projected.valid.size() ||
        projected.pixel.size() !=
            static_cast<std::size_t>(projected.resolution) * projected.resolution *
                projected.resolution)
        throw ShapeMismatchError("projected grid is inconsistent");

    FeatureVolume vol;
    vol.resolution = projected.resolution;
    vol.channels = features.channels;
    vol.data.assign(projected.pixel.size() * features.channels, 0.0f);

    const int w = features.width, h = features.height, k = features.channels;
    for (std::size_t i = 0; i < projected.pixel.size(); ++i) {
        if (!projected.valid[i]) continue;
        const double u = projected.pixel[i].x();
        const double v = projected.pixel[i].y();
        // Sample positions sit on integer pixel coordinates; anything beyond
        // the half-cell border is out of bounds, inside it clamps to edge.
        if (u < -0.5 || u > w - 0.5 || v < -0.5 || v > h - 0.5) continue;
        const double uc = std::clamp(u, 0.0, double(w - 1));
        const double vc = std::clamp(v, 0.0, double(h - 1));
        const int x0 = std::min(int(uc), w - 2 < 0 ? 0 : w - 2);
        const int y0 = std::min(int(vc), h - 2 < 0 ? 0 : h - 2);
        const int x1 = std::min(x0 + 1, w - 1);
        const int y1 = std::min(y0 + 1, h - 1);
        const double fx = uc - x0;
        const double fy = vc - y0;
        float* dst = &vol.data[i * k];
        for (int c = 0; c < k; ++c) {
            const double top = features.at(y0, x0, c) + fx * (features.at(y0, x1, c) - features.at(y0, x0, c));
            const double bot = features.at(y1, x0, c) + fx * (features.at(y1, x1, c) - features.at(y1, x0, c));
            dst[c] = static_cast<float>(top + fy * (bot - top));
        }
    }
    return vol;
}

std::size_t OccupancyVolume::count() const {
    std::size_t n = 0;
    for (std::uint8_t v : occupied) n += v;
    return n;
}

OccupancyVolume voxelize_points(const PointCloud& cloud, const VoxelGridParams& params) {
    params.validate();
    OccupancyVolume vol;
    vol.resolution = params.resolution;
    vol.occupied.assign(params.voxel_count(), 0);
    if (cloud.empty()) return vol;

    // Points farther than epsilon from the box cannot mark any voxel.
    const double half = params.side_length / 2.0;
    const double eps = params.epsilon;
    PointCloud inside;
    inside.reserve(cloud.size());
    for (const Vec3& p : cloud) {
        if (p.x() < -half - eps || p.x() > half + eps) continue;
        if (p.y() < -half - eps || p.y() > half + eps) continue;
        if (p.z() < -eps || p.z() > params.side_length + eps) continue;
        inside.push_back(p);
    }
    if (inside.empty()) return vol;

    const SpatialHash hash(inside, std::max(eps, params.cell_size()));
    std::size_t i = 0;
    for (int x = 0; x < params.resolution; ++x)
        for (int y = 0; y < params.resolution; ++y)
            for (int z = 0; z < params.resolution; ++z, ++i)
                vol.occupied[i] = hash.any_within(voxel_center(params, x, y, z), eps) ? 1 : 0;
    return vol;
}

OccupancyVolume voxelize_points_bruteforce(const PointCloud& cloud,
                                           const VoxelGridParams& params) {
    params.validate();
    OccupancyVolume vol;
    vol.resolution = params.resolution;
    vol.occupied.assign(params.voxel_count(), 0);
    const double eps2 = params.epsilon * params.epsilon;
    std::size_t i = 0;
    for (int x = 0; x < params.resolution; ++x)
        for (int y = 0; y < params.resolution; ++y)
            for (int z = 0; z < params.resolution; ++z, ++i) {
                const Vec3 c = voxel_center(params, x, y, z);
                for (const Vec3& p : cloud) {
                    if ((p - c).squaredNorm() < eps2) {
                        vol.occupied[i] = 1;
                        break;
                    }
                }
            }
    return vol;
}

Tensor to_tensor(const OccupancyVolume& v) {
    const auto n = static_cast<std::uint64_t>(v.resolution);
    return make_tensor_u8({n, n, n}, v.occupied);
}

Tensor to_tensor(const FeatureVolume& v) {
    const auto n = static_cast<std::uint64_t>(v.resolution);
    return make_tensor_f32({n, n, n, static_cast<std::uint64_t>(v.channels)}, v.data);
}

OccupancyVolume occupancy_from_tensor(const Tensor& t) {
    if (t.dims.size() != 3 || t.dims[0] != t.dims[1] || t.dims[1] != t.dims[2])
        throw ShapeMismatchError("occupancy tensor must be N x N x N");
    OccupancyVolume v;
    v.resolution = static_cast<int>(t.dims[0]);
    v.occupied = tensor_as_u8(t);
    return v;
}

FeatureVolume feature_volume_from_tensor(const Tensor& t) {
    if (t.dims.size() != 4 || t.dims[0] != t.dims[1] || t.dims[1] != t.dims[2])
        throw ShapeMismatchError("feature tensor must be N x N x N x K");
    FeatureVolume v;
    v.resolution = static_cast<int>(t.dims[0]);
    v.channels = static_cast<int>(t.dims[3]);
    v.data = tensor_as_f32(t);
    return v;
}

}  // namespace egoscene
