// Copyright Contributors to the EgoScene Project
// SPDX-License-Identifier: Apache-2.0

#include "egoscene/contact_optimizer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "egoscene/errors.hpp"

namespace egoscene {

namespace {

constexpr double kGradTol = 1e-8;
constexpr double kArmijoC = 1e-4;
constexpr double kInitialStep = 0.1;   // meters along the unit direction
constexpr double kMinStep = 1e-12;

struct EnergyBreakdown {
    double total = 0.0, reproj = 0.0, prior = 0.0, contact = 0.0;
};

EnergyBreakdown evaluate(const Pose& pose, const Pose& init, const Keypoints2D& detections,
                         const SpatialHash& hash, const FisheyeModel& model,
                         const EnergyWeights& w) {
    EnergyBreakdown e;
    e.reproj = reprojection_energy(pose, detections, model);
    e.prior = pose_prior_energy(pose, init);
    e.contact = contact_energy(pose, hash, w.epsilon);
    e.total = w.lambda_reproj * e.reproj + w.lambda_prior * e.prior + w.lambda_contact * e.contact;
    if (!std::isfinite(e.total)) throw NonFiniteEnergyError("energy became non-finite");
    return e;
}

// Analytic gradient; the contact term uses the nearest neighbor active at
// `pose` (held fixed by the caller across a line search).
std::vector<Vec3> gradient(const Pose& pose, const Pose& init, const Keypoints2D& detections,
                           const SpatialHash& hash, const FisheyeModel& model,
                           const EnergyWeights& w) {
    std::vector<Vec3> g(pose.joints.size(), Vec3::Zero());
    for (int j = 0; j < pose.size(); ++j) {
        const Vec3& p = pose.joints[j];
        // Reprojection: 2 * conf * J^T (pixel - detection).
        if (std::hypot(p.x(), p.y()) > 0.0) {
            const Vec2 px = model.project_clamped(p);
            const Mat23 jac = model.projection_jacobian(p);
            g[j] += w.lambda_reproj * 2.0 * detections.confidence[j] *
                    (jac.transpose() * (px - detections.uv[j]));
        }
        // Prior: 2 * (p - init).
        g[j] += w.lambda_prior * 2.0 * (p - init.joints[j]);
        // Contact: 2 * (p - nearest) when the joint is within the margin.
        if (const auto nn = hash.nearest(p)) {
            if (nn->second <= w.epsilon)
                g[j] += w.lambda_contact * 2.0 * (p - hash.point(nn->first));
        }
    }
    return g;
}

}  // namespace

void EnergyWeights::validate() const {
    if (lambda_reproj < 0.0 || lambda_prior < 0.0 || lambda_contact < 0.0)
        throw InvalidSpecError("energy weights must be non-negative");
    if (!(epsilon > 0.0)) throw InvalidSpecError("contact margin must be positive");
}

double contact_energy(const Pose& pose, const PointCloud& cloud, double epsilon) {
    if (cloud.empty()) throw EmptySceneError("contact energy needs a non-empty cloud");
    return contact_energy(pose, SpatialHash(cloud, epsilon), epsilon);
}

double contact_energy(const Pose& pose, const SpatialHash& hash, double epsilon) {
    if (hash.empty()) throw EmptySceneError("contact energy needs a non-empty cloud");
    double e = 0.0;
    for (const Vec3& joint : pose.joints) {
        const auto nn = hash.nearest(joint);
        if (nn && nn->second <= epsilon) e += nn->second * nn->second;
    }
    return e;
}

double reprojection_energy(const Pose& pose, const Keypoints2D& detections,
                           const FisheyeModel& model) {
    if (pose.size() != detections.size())
        throw ShapeMismatchError("detections do not match the pose");
    double e = 0.0;
    for (int j = 0; j < pose.size(); ++j) {
        const Vec3& p = pose.joints[j];
        if (std::hypot(p.x(), p.y()) == 0.0) continue;  // no azimuth, skip
        const Vec2 px = model.project_clamped(p);
        e += detections.confidence[j] * (px - detections.uv[j]).squaredNorm();
    }
    return e;
}

double pose_prior_energy(const Pose& pose, const Pose& init) {
    if (pose.size() != init.size()) throw ShapeMismatchError("anchor does not match the pose");
    double e = 0.0;
    for (int j = 0; j < pose.size(); ++j) e += (pose.joints[j] - init.joints[j]).squaredNorm();
    return e;
}

void OptimizationTrace::save_csv(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "iteration,total,reproj,prior,contact,step,grad_norm\n";
    char line[192];
    for (const TraceRow& r : rows) {
        std::snprintf(line, sizeof(line), "%d,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", r.iteration,
                      r.total, r.reproj, r.prior, r.contact, r.step, r.grad_norm);
        out << line;
    }
}

OptimizationTrace optimize_pose(const Pose& init, const Keypoints2D& detections,
                                const PointCloud& cloud, const FisheyeModel& model,
                                const EnergyWeights& weights, int max_iters) {
    weights.validate();
    if (max_iters < 1) throw InvalidSpecError("max_iters must be at least 1");
    if (cloud.empty()) throw EmptySceneError("optimizer needs a non-empty scene cloud");
    if (init.size() != detections.size())
        throw ShapeMismatchError("detections do not match the pose");

    const SpatialHash hash(cloud, weights.epsilon);

    OptimizationTrace trace;
    Pose pose = init;
    EnergyBreakdown e = evaluate(pose, init, detections, hash, model, weights);
    trace.rows.push_back({0, e.total, e.reproj, e.prior, e.contact, 0.0, 0.0});

    for (int it = 1; it <= max_iters; ++it) {
        const std::vector<Vec3> g = gradient(pose, init, detections, hash, model, weights);
        double g2 = 0.0;
        for (const Vec3& gi : g) g2 += gi.squaredNorm();
        const double gnorm = std::sqrt(g2);
        trace.rows.back().grad_norm = gnorm;
        if (gnorm < kGradTol) {
            trace.converged = true;
            break;
        }

        // Backtracking along the unit direction; the Armijo threshold scales
        // with the energy, so commonly rescaled weights take identical steps.
        bool accepted = false;
        for (double step = kInitialStep; step >= kMinStep; step *= 0.5) {
            Pose trial = pose;
            for (int j = 0; j < pose.size(); ++j) trial.joints[j] -= (step / gnorm) * g[j];
            const EnergyBreakdown te = evaluate(trial, init, detections, hash, model, weights);
            if (te.total <= e.total - kArmijoC * step * gnorm) {
                pose = std::move(trial);
                e = te;
                trace.rows.push_back({it, e.total, e.reproj, e.prior, e.contact, step, 0.0});
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            // No descent step exists along this direction at any length the
            // search can resolve: treat as converged.
            trace.converged = true;
            break;
        }
    }
    trace.final_pose = pose;
    return trace;
}

}  // namespace egoscene
