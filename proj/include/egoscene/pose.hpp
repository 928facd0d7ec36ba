// Copyright Contributors to the EgoScene Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "egoscene/types.hpp"

namespace egoscene {

/// Camera-frame joint positions in meters plus the joint-name table.
struct Pose {
    std::vector<std::string> joint_names;
    std::vector<Vec3> joints;

    int size() const { return static_cast<int>(joints.size()); }

    nlohmann::json to_json() const;
    static Pose from_json(const nlohmann::json& doc);
    void save(const std::filesystem::path& path) const;
    static Pose load(const std::filesystem::path& path);
};

/// 2D joint detections with per-joint confidence, pixels.
struct Keypoints2D {
    std::vector<Vec2> uv;
    std::vector<double> confidence;

    int size() const { return static_cast<int>(uv.size()); }

    nlohmann::json to_json(const std::vector<std::string>& joint_names) const;
    static Keypoints2D from_json(const nlohmann::json& doc);
    void save(const std::filesystem::path& path, const std::vector<std::string>& joint_names) const;
    static Keypoints2D load(const std::filesystem::path& path);
};

/// Rooted bone tree: parent index per joint (-1 at the root) and the
/// canonical length of the bone reaching each non-root joint.
struct BoneTemplate {
    std::vector<int> parent;
    std::vector<double> length;

    int size() const { return static_cast<int>(parent.size()); }
    void validate() const;  // throws InvalidTemplateError
};

namespace skeleton {

/// 15-joint skeleton: neck root, then right/left arm (shoulder, elbow,
/// wrist) and right/left leg (hip, knee, ankle, foot). Hips hang off the
/// neck directly; there is no pelvis joint.
const std::vector<std::string>& joint_names();
const std::vector<int>& parents();
/// Canonical bone lengths in meters, index aligned with parents().
const std::vector<double>& bone_lengths();
BoneTemplate bone_template();
int joint_index(const std::string& name);
int joint_count();

}  // namespace skeleton

/// Pose with the default skeleton's names and all joints at `fill`.
Pose make_default_pose(const Vec3& fill = Vec3::Zero());

}  // namespace egoscene
