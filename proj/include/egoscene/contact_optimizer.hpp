// Copyright Contributors to the EgoScene Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <vector>

#include "egoscene/fisheye_camera.hpp"
#include "egoscene/point_cloud.hpp"
#include "egoscene/pose.hpp"
#include "egoscene/spatial_hash.hpp"

namespace egoscene {

struct EnergyWeights {
    double lambda_reproj = 1e-3;   // pixel^2 scale, brings it near the metric terms
    double lambda_prior = 1.0;
    double lambda_contact = 10.0;
    double epsilon = 0.05;         // contact margin, meters

    void validate() const;
};

/// Sum over joints of d_n^2 for joints whose nearest-cloud distance d_n is
/// at most epsilon; joints farther away contribute nothing. Nearest
/// neighbors come from the shared spatial hash.
double contact_energy(const Pose& pose, const PointCloud& cloud, double epsilon);
double contact_energy(const Pose& pose, const SpatialHash& hash, double epsilon);

/// Confidence-weighted squared pixel error between projected joints and 2D
/// detections. Joints beyond the fov enter through the clamped projection
/// (their pixel sits on the fov-boundary circle), which keeps the energy
/// continuous across the fov edge; joints with undefined azimuth are skipped.
double reprojection_energy(const Pose& pose, const Keypoints2D& detections,
                           const FisheyeModel& model);

/// Squared deviation from the anchor pose, meters^2.
double pose_prior_energy(const Pose& pose, const Pose& init);

struct TraceRow {
    int iteration = 0;
    double total = 0.0, reproj = 0.0, prior = 0.0, contact = 0.0;
    double step = 0.0;       // accepted step length along the unit direction
    double grad_norm = 0.0;
};

struct OptimizationTrace {
    std::vector<TraceRow> rows;  // initial state plus one row per accepted step
    Pose final_pose;
    bool converged = false;

    void save_csv(const std::filesystem::path& path) const;
};

/// First-order descent with backtracking line search on
///     E(P) = lambda_R * E_reproj + lambda_J * E_prior + lambda_C * E_contact.
/// Gradients are analytic; the contact term differentiates through the
/// active nearest neighbor, recomputed every iteration and held fixed inside
/// a line search. Accepted steps strictly decrease E. The search direction
/// is the normalized gradient, so scaling all three lambdas by a common
/// factor leaves the iterate sequence unchanged. Stops when the gradient
/// norm falls below 1e-8 or after max_iters accepted steps.
OptimizationTrace optimize_pose(const Pose& init, const Keypoints2D& detections,
                                const PointCloud& cloud, const FisheyeModel& model,
                                const EnergyWeights& weights, int max_iters);

}  // namespace egoscene
