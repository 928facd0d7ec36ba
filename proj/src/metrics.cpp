// Copyright Contributors to the EgoScene Project
// SPDX-License-Identifier: Apache-2.0

#include "egoscene/metrics.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "egoscene/errors.hpp"
#include "egoscene/spatial_hash.hpp"

namespace egoscene {

namespace {

void require_same_joints(const Pose& a, const Pose& b) {
    if (a.size() != b.size() || a.size() == 0)
        throw ShapeMismatchError("poses have different joint counts");
}

}  // namespace

Pose SimilarityTransform::apply(const Pose& pose) const {
    Pose out = pose;
    for (Vec3& p : out.joints) p = apply(p);
    return out;
}

double mpjpe(const Pose& pred, const Pose& gt) {
    require_same_joints(pred, gt);
    double sum = 0.0;
    for (int j = 0; j < pred.size(); ++j) sum += (pred.joints[j] - gt.joints[j]).norm();
    return sum / pred.size() * 1000.0;
}

SimilarityTransform procrustes_align(const Pose& pred, const Pose& gt) {
    require_same_joints(pred, gt);
    const int n = pred.size();
    if (n < 3) throw DegenerateConfigurationError("need at least 3 joints");

    Vec3 mu_p = Vec3::Zero(), mu_g = Vec3::Zero();
    for (int j = 0; j < n; ++j) {
        mu_p += pred.joints[j];
        mu_g += gt.joints[j];
    }
    mu_p /= n;
    mu_g /= n;

    Mat3 cov = Mat3::Zero();
    double var_p = 0.0;
    for (int j = 0; j < n; ++j) {
        const Vec3 p = pred.joints[j] - mu_p;
        const Vec3 g = gt.joints[j] - mu_g;
        cov += g * p.transpose();
        var_p += p.squaredNorm();
    }
    cov /= n;
    var_p /= n;

    Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vec3 sv = svd.singularValues();
    // Coincident points give var_p ~ 0; collinear points leave the rotation
    // about the line undetermined (second singular value ~ 0).
    const double scale_ref = std::max(1.0, sv(0));
    if (var_p < 1e-18 || sv(1) < 1e-12 * scale_ref)
        throw DegenerateConfigurationError("joint set is coincident or collinear");

    Vec3 d = Vec3::Ones();
    if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) d(2) = -1.0;

    SimilarityTransform t;
    t.rotation = svd.matrixU() * d.asDiagonal() * svd.matrixV().transpose();
    t.scale = sv.dot(d) / var_p;
    t.translation = mu_g - t.scale * (t.rotation * mu_p);
    return t;
}

double pa_mpjpe(const Pose& pred, const Pose& gt) {
    return mpjpe(procrustes_align(pred, gt).apply(pred), gt);
}

Pose normalize_bone_lengths(const Pose& pose, const BoneTemplate& tmpl) {
    tmpl.validate();
    if (tmpl.size() != pose.size())
        throw InvalidTemplateError("template joint count differs from the pose");

    // Children must be visited after their parent; with parent[j] < j this is
    // a single forward pass, otherwise iterate until settled.
    Pose out = pose;
    std::vector<char> done(pose.size(), 0);
    int remaining = pose.size();
    while (remaining > 0) {
        const int before = remaining;
        for (int j = 0; j < pose.size(); ++j) {
            if (done[j]) continue;
            const int p = tmpl.parent[j];
            if (p < 0) {
                done[j] = 1;  // root keeps its position
                --remaining;
                continue;
            }
            if (!done[p]) continue;
            const Vec3 bone = pose.joints[j] - pose.joints[p];
            const double len = bone.norm();
            // Degenerate zero-length bones collapse onto the parent.
            out.joints[j] = out.joints[p] + (len > 1e-12 ? (tmpl.length[j] / len) * bone
                                                         : Vec3::Zero());
            done[j] = 1;
            --remaining;
        }
        if (remaining == before) throw InvalidTemplateError("unreachable joints in template");
    }
    return out;
}

double ba_mpjpe(const Pose& pred, const Pose& gt, const BoneTemplate& tmpl) {
    return pa_mpjpe(normalize_bone_lengths(pred, tmpl), normalize_bone_lengths(gt, tmpl));
}

double contact_rate(const std::vector<Pose>& poses, const PointCloud& scene, double threshold) {
    if (scene.empty()) throw EmptySceneError("contact rate needs a non-empty scene cloud");
    if (poses.empty()) throw InvalidSpecError("contact rate needs at least one pose");
    const SpatialHash hash(scene, threshold);
    int in_contact = 0;
    for (const Pose& pose : poses) {
        for (const Vec3& joint : pose.joints) {
            if (hash.any_within(joint, threshold)) {
                ++in_contact;
                break;
            }
        }
    }
    return double(in_contact) / double(poses.size());
}

PenetrationResult penetration_free_rate(const std::vector<Pose>& poses,
                                        const DepthMap& scene_depth, const FisheyeModel& model,
                                        double margin) {
    if (poses.empty()) throw InvalidSpecError("penetration rate needs at least one pose");
    PenetrationResult result;
    int free_poses = 0;
    for (const Pose& pose : poses) {
        bool penetrates = false;
        for (const Vec3& joint : pose.joints) {
            const auto px = model.try_project(joint);
            if (!px) {
                ++result.skipped_joints;
                continue;
            }
            const int x = static_cast<int>(std::lround(px->x()));
            const int y = static_cast<int>(std::lround(px->y()));
            if (x < 0 || x >= scene_depth.width || y < 0 || y >= scene_depth.height ||
                !scene_depth.is_valid(x, y)) {
                ++result.skipped_joints;
                continue;
            }
            if (joint.norm() > double(scene_depth.at(x, y)) + margin) {
                penetrates = true;
                break;
            }
        }
        if (!penetrates) ++free_poses;
    }
    result.fraction = double(free_poses) / double(poses.size());
    return result;
}

}  // namespace egoscene
