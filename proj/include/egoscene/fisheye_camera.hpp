// Copyright Contributors to the EgoScene Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include <json.hpp>

#include "egoscene/errors.hpp"
#include "egoscene/types.hpp"

namespace egoscene {

/// Omnidirectional fisheye camera model.
///
/// Camera frame: +z points away from the camera toward the scene, +x right,
/// +y down in the image. Projection depends only on ray direction: a 3D point
/// at incidence angle theta (angle to the +z axis) maps to
///
///     pixel = center + r(theta) * (unit xy-direction of the point)
///
/// where r is a strictly increasing radius function on [0, max_theta].
/// Two kinds are supported:
///   - Equidistant: r(theta) = focal * theta.
///   - Polynomial:  r(theta) = sum_i coeffs[i] * theta^(i+1)  (no constant
///     term, so r(0) = 0). Inverted by bisection; monotonicity is enforced
///     at construction by dense sampling.
///
/// Depth convention everywhere in this library: Euclidean ray distance from
/// the camera center in meters, not z-depth. This is the natural choice for
/// fields of view beyond 180 degrees.
///
/// Immutable after construction; all member functions are pure, so instances
/// can be shared freely across threads.
class FisheyeModel {
public:
    enum class Kind { Equidistant, Polynomial };

    static FisheyeModel equidistant(double focal_px, const Vec2& center,
                                    int image_width, int image_height,
                                    double max_theta_rad);

    static FisheyeModel polynomial(std::vector<double> coeffs, const Vec2& center,
                                   int image_width, int image_height,
                                   double max_theta_rad);

    Kind kind() const { return kind_; }
    double focal() const { return focal_; }
    const std::vector<double>& poly_coeffs() const { return coeffs_; }
    const Vec2& center() const { return center_; }
    int image_width() const { return width_; }
    int image_height() const { return height_; }
    double max_theta() const { return max_theta_; }

    /// Radius function r(theta), pixels. Valid for theta in [0, max_theta].
    double radius_at(double theta) const;
    /// r(max_theta): the image radius of the field-of-view boundary.
    double max_radius() const { return max_radius_; }
    /// Inverse of the radius function (bisection for polynomial models).
    double theta_from_radius(double radius_px) const;

    /// Project a camera-frame point to a pixel.
    /// Throws OutOfFovError if the incidence angle exceeds max_theta,
    /// DegenerateRayError for the origin or a direction with undefined azimuth.
    Vec2 project(const Vec3& point) const;

    /// Like project() but reports failure as nullopt instead of throwing.
    std::optional<Vec2> try_project(const Vec3& point) const;

    /// Projection with the incidence angle clamped to max_theta. Out-of-fov
    /// points land on the fov-boundary circle at their azimuth, which keeps
    /// the result continuous across the fov edge. Still throws
    /// DegenerateRayError when the azimuth is undefined.
    Vec2 project_clamped(const Vec3& point) const;

    /// 2x3 Jacobian of project_clamped() with respect to the point.
    Mat23 projection_jacobian(const Vec3& point) const;

    /// Unit direction of the ray through a pixel.
    /// Throws OutOfFovError if the pixel radius exceeds r(max_theta).
    Vec3 unit_ray(const Vec2& pixel) const;

    /// Point at Euclidean distance ray_distance along the pixel's ray.
    /// project(unproject(px, d)) == px within tolerance; the result has
    /// norm exactly ray_distance.
    Vec3 unproject(const Vec2& pixel, double ray_distance) const;

    nlohmann::json to_json() const;
    static FisheyeModel from_json(const nlohmann::json& doc);

    void save(const std::filesystem::path& path) const;
    static FisheyeModel load(const std::filesystem::path& path);

    bool operator==(const FisheyeModel&) const = default;

private:
    FisheyeModel() = default;
    void validate() const;

    Kind kind_ = Kind::Equidistant;
    double focal_ = 0.0;
    std::vector<double> coeffs_;
    Vec2 center_{0.0, 0.0};
    int width_ = 0;
    int height_ = 0;
    double max_theta_ = 0.0;
    double max_radius_ = 0.0;
};

/// The equidistant model used by tests and the synthetic dataset:
/// f = 160 px, 640x640 image, principal point (320, 320), 100 degree
/// half field of view.
FisheyeModel default_test_camera();

}  // namespace egoscene
