// Copyright Contributors to the EgoScene Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "egoscene/depth_scene.hpp"
#include "egoscene/point_cloud.hpp"
#include "egoscene/pose.hpp"

namespace egoscene {

/// Similarity transform p -> scale * rotation * p + translation with a
/// proper rotation (det +1, no reflection).
struct SimilarityTransform {
    double scale = 1.0;
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();

    Vec3 apply(const Vec3& p) const { return scale * (rotation * p) + translation; }
    Pose apply(const Pose& pose) const;
};

/// Mean per-joint Euclidean distance, millimeters.
double mpjpe(const Pose& pred, const Pose& gt);

/// Least-squares similarity alignment of pred onto gt (Umeyama/Kabsch via
/// SVD with reflection correction). Throws DegenerateConfigurationError for
/// coincident or collinear joint sets.
SimilarityTransform procrustes_align(const Pose& pred, const Pose& gt);

/// mpjpe after optimal similarity alignment of pred onto gt.
double pa_mpjpe(const Pose& pred, const Pose& gt);

/// Both poses are re-posed to the template bone lengths (walking the tree
/// from the root, rescaling each bone vector), then compared with pa_mpjpe.
double ba_mpjpe(const Pose& pred, const Pose& gt, const BoneTemplate& tmpl);

/// Re-pose to canonical bone lengths, preserving bone directions and the
/// root position.
Pose normalize_bone_lengths(const Pose& pose, const BoneTemplate& tmpl);

/// Fraction of poses with at least one joint strictly closer than
/// `threshold` to the scene cloud. A pose with no such joint floats.
double contact_rate(const std::vector<Pose>& poses, const PointCloud& scene,
                    double threshold = 0.05);

struct PenetrationResult {
    double fraction = 0.0;  // penetration-free poses / total
    int skipped_joints = 0; // joints outside the fov or without scene depth
};

/// A joint penetrates when its ray distance exceeds the scene depth at its
/// projected pixel by more than `margin`; a pose is penetration-free when no
/// joint penetrates. Evaluated against the depth map along camera rays.
PenetrationResult penetration_free_rate(const std::vector<Pose>& poses,
                                        const DepthMap& scene_depth, const FisheyeModel& model,
                                        double margin = 0.05);

}  // namespace egoscene
