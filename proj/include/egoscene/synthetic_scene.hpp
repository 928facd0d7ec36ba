// Copyright Contributors to the EgoScene Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "egoscene/depth_scene.hpp"
#include "egoscene/fisheye_camera.hpp"
#include "egoscene/pose.hpp"

namespace egoscene {

// Analytic primitives, world frame, meters. Plane surfaces satisfy
// normal . x == offset with a unit normal.
struct Plane {
    Vec3 normal{0.0, 0.0, 1.0};
    double offset = 0.0;
};

struct AxisBox {
    Vec3 min{0.0, 0.0, 0.0};
    Vec3 max{1.0, 1.0, 1.0};
};

struct CapsuleShape {
    Vec3 a{0.0, 0.0, 0.0};
    Vec3 b{0.0, 0.0, 1.0};
    double radius = 0.05;
};

enum class Material { Scene, Body };

struct ScenePrimitive {
    std::variant<Plane, AxisBox, CapsuleShape> shape;
    Material material = Material::Scene;
};

/// Rigid placement of the egocentric camera in the world.
/// Camera frame: +z looks along `forward` (down toward the body), image +x
/// along `right`, image +y completes it.
struct CameraRig {
    Vec3 position{0.0, 0.0, 0.0};
    Mat3 world_from_camera = Mat3::Identity();  // columns: right, image-down, forward

    Vec3 to_camera(const Vec3& world_point) const {
        return world_from_camera.transpose() * (world_point - position);
    }
    Vec3 to_world_dir(const Vec3& camera_dir) const { return world_from_camera * camera_dir; }
};

/// Primitive soup plus the camera placement used to render it.
struct SceneModel {
    std::vector<ScenePrimitive> primitives;
    CameraRig camera;

    void validate() const;  // at least one scene primitive, sane shapes

    nlohmann::json to_json() const;
    static SceneModel from_json(const nlohmann::json& doc);
};

struct RayHit {
    double t = 0.0;  // distance along the unit ray
    int primitive = -1;
    Material material = Material::Scene;
};

/// Nearest intersection of the world-frame ray with the scene, body
/// primitives included only when requested. Hits closer than a small
/// epsilon are ignored.
std::optional<RayHit> raycast(const SceneModel& scene, const Vec3& origin, const Vec3& dir,
                              bool include_body);

/// Per-pixel ray distance from the rig camera; rays that miss everything
/// (or pixels beyond the fov circle) stay invalid.
DepthMap raycast_depth(const FisheyeModel& model, const SceneModel& scene, bool include_body);

/// Pixel = 1 where the nearest hit, body included, is a body capsule.
SegMask render_body_mask(const FisheyeModel& model, const SceneModel& scene);

// ---------------------------------------------------------------------------
// Parametric rooms and bodies.

struct RoomSpec {
    bool walls = true;
    double half_extent = 3.0;   // room spans +-half_extent in x and y
    double wall_height = 2.8;
    bool ceiling = false;
    std::vector<AxisBox> furniture;

    void validate() const;
};

/// Floor plane at z = 0 plus the requested walls/ceiling/furniture.
SceneModel build_room(const RoomSpec& spec);

enum class PoseKind { Standing, Sitting, Squatting };

std::string to_string(PoseKind kind);
PoseKind pose_kind_from_string(const std::string& s);

struct PoseSpec {
    PoseKind kind = PoseKind::Standing;
    double body_scale = 1.0;
    Vec2 offset{0.0, 0.0};  // horizontal placement of the body
    double yaw = 0.0;       // facing direction, radians
    std::uint64_t seed = 0;
    double jitter = 0.0;    // 0 disables all randomization

    double seat_height = 0.45;  // sitting kind: top of the seat
};

/// World-frame pose, the body capsules around its bones, and the camera rig
/// rigidly attached at the head (slightly above the neck, looking down).
/// Deterministic: the same spec always yields the same sample.
struct SampledBody {
    Pose pose_world;
    std::vector<CapsuleShape> capsules;
    CameraRig camera;
};

SampledBody sample_pose(const PoseSpec& spec);

Pose pose_to_camera_frame(const Pose& world, const CameraRig& rig);

// ---------------------------------------------------------------------------
// Dataset generation.

struct DatasetSpec {
    RoomSpec room;
    FisheyeModel calibration = default_test_camera();
    std::uint64_t seed = 0;
    double jitter = 1.0;  // scales the per-frame pose randomization
    std::vector<PoseKind> kinds = {PoseKind::Standing, PoseKind::Sitting, PoseKind::Squatting};
};

struct FrameRecord {
    int id = 0;
    std::string kind;
    std::string depth_body;   // paths relative to the manifest
    std::string depth_scene;
    std::string seg_mask;
    std::string pose;
};

struct Manifest {
    std::uint64_t seed = 0;
    std::string calibration;
    std::vector<FrameRecord> frames;

    nlohmann::json to_json() const;
    static Manifest from_json(const nlohmann::json& doc);
    void save(const std::filesystem::path& path) const;
    static Manifest load(const std::filesystem::path& path);
};

/// Renders `count` frames (depth with body, scene depth, body mask,
/// camera-frame pose) into out_dir and writes manifest.json. Regenerating
/// with the same spec produces byte-identical files.
Manifest generate_dataset(const DatasetSpec& spec, int count,
                          const std::filesystem::path& out_dir);

}  // namespace egoscene
