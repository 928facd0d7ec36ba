// Copyright Contributors to the EgoScene Project
// SPDX-License-Identifier: Apache-2.0

#include "egoscene/fisheye_camera.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

namespace egoscene {

namespace {

constexpr double kAzimuthEps = 0.0;  // rho == 0 exactly is the degenerate set
constexpr int kMonotonicitySamples = 2048;
constexpr double kBisectionTolRad = 1e-10;

double poly_eval(const std::vector<double>& coeffs, double theta) {
    // r(theta) = c0*theta + c1*theta^2 + ... ; Horner on the shifted form.
    double acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = (acc + *it) * theta;
    return acc;
}

}  // namespace

FisheyeModel FisheyeModel::equidistant(double focal_px, const Vec2& center,
                                       int image_width, int image_height,
                                       double max_theta_rad) {
    FisheyeModel m;
    m.kind_ = Kind::Equidistant;
    m.focal_ = focal_px;
    m.center_ = center;
    m.width_ = image_width;
    m.height_ = image_height;
    m.max_theta_ = max_theta_rad;
    m.max_radius_ = m.radius_at(max_theta_rad);
    m.validate();
    return m;
}

FisheyeModel FisheyeModel::polynomial(std::vector<double> coeffs, const Vec2& center,
                                      int image_width, int image_height,
                                      double max_theta_rad) {
    FisheyeModel m;
    m.kind_ = Kind::Polynomial;
    m.coeffs_ = std::move(coeffs);
    m.center_ = center;
    m.width_ = image_width;
    m.height_ = image_height;
    m.max_theta_ = max_theta_rad;
    m.max_radius_ = m.radius_at(max_theta_rad);
    m.validate();
    return m;
}

void FisheyeModel::validate() const {
    if (width_ <= 0 || height_ <= 0)
        throw InvalidCalibrationError("image size must be positive");
    if (!(center_.x() >= 0.0 && center_.x() < width_ && center_.y() >= 0.0 &&
          center_.y() < height_))
        throw InvalidCalibrationError("principal point outside image bounds");
    if (!(max_theta_ > 0.0 && max_theta_ <= std::numbers::pi))
        throw InvalidCalibrationError("max_theta must lie in (0, pi]");
    if (kind_ == Kind::Equidistant) {
        if (!(focal_ > 0.0) || !std::isfinite(focal_))
            throw InvalidCalibrationError("equidistant focal must be positive");
        return;
    }
    if (coeffs_.empty()) throw InvalidCalibrationError("polynomial needs coefficients");
    for (double c : coeffs_)
        if (!std::isfinite(c)) throw InvalidCalibrationError("non-finite coefficient");
    // Strictly increasing radius on [0, max_theta], checked by dense sampling.
    double prev = 0.0;
    for (int i = 1; i <= kMonotonicitySamples; ++i) {
        const double theta = max_theta_ * i / kMonotonicitySamples;
        const double r = poly_eval(coeffs_, theta);
        if (!std::isfinite(r) || r <= prev)
            throw InvalidCalibrationError("radius function not strictly increasing");
        prev = r;
    }
}

double FisheyeModel::radius_at(double theta) const {
    return kind_ == Kind::Equidistant ? focal_ * theta : poly_eval(coeffs_, theta);
}

double FisheyeModel::theta_from_radius(double radius_px) const {
    if (kind_ == Kind::Equidistant) return radius_px / focal_;
    // Monotone by construction, so a plain bracketed bisection is safe.
    double lo = 0.0, hi = max_theta_;
    while (hi - lo > kBisectionTolRad) {
        const double mid = 0.5 * (lo + hi);
        (radius_at(mid) < radius_px ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

Vec2 FisheyeModel::project(const Vec3& point) const {
    const double rho = std::hypot(point.x(), point.y());
    if (rho == 0.0 && point.z() == 0.0) throw DegenerateRayError("cannot project the origin");
    const double theta = std::atan2(rho, point.z());
    if (theta > max_theta_) throw OutOfFovError("incidence angle exceeds max_theta");
    if (rho <= kAzimuthEps) {
        if (point.z() > 0.0) return center_;
        throw DegenerateRayError("backward on-axis ray has no azimuth");
    }
    const double r = radius_at(theta);
    return center_ + (r / rho) * Vec2(point.x(), point.y());
}

std::optional<Vec2> FisheyeModel::try_project(const Vec3& point) const {
    const double rho = std::hypot(point.x(), point.y());
    if (rho == 0.0 && point.z() == 0.0) return std::nullopt;
    const double theta = std::atan2(rho, point.z());
    if (theta > max_theta_) return std::nullopt;
    if (rho <= kAzimuthEps) {
        if (point.z() > 0.0) return center_;
        return std::nullopt;
    }
    return center_ + (radius_at(theta) / rho) * Vec2(point.x(), point.y());
}

Vec2 FisheyeModel::project_clamped(const Vec3& point) const {
    const double rho = std::hypot(point.x(), point.y());
    if (rho == 0.0) {
        if (point.z() > 0.0) return center_;
        throw DegenerateRayError("clamped projection undefined without azimuth");
    }
    const double theta = std::min(std::atan2(rho, point.z()), max_theta_);
    return center_ + (radius_at(theta) / rho) * Vec2(point.x(), point.y());
}

Mat23 FisheyeModel::projection_jacobian(const Vec3& point) const {
    const double x = point.x(), y = point.y(), z = point.z();
    const double rho2 = x * x + y * y;
    const double rho = std::sqrt(rho2);
    if (rho == 0.0) throw DegenerateRayError("jacobian undefined on the optical axis");
    const double theta = std::atan2(rho, z);

    // pixel = center + r(theta) * u,  u = (x, y) / rho.
    const Vec2 u(x / rho, y / rho);
    const double rho3 = rho2 * rho;
    // d u / d point (u does not depend on z).
    Mat23 du;
    du << y * y / rho3, -x * y / rho3, 0.0,
          -x * y / rho3, x * x / rho3, 0.0;

    if (theta >= max_theta_) {
        // Clamped branch: radius frozen at r(max_theta).
        return max_radius_ * du;
    }

    const double r = radius_at(theta);
    double drdtheta;
    if (kind_ == Kind::Equidistant) {
        drdtheta = focal_;
    } else {
        drdtheta = 0.0;
        double theta_pow = 1.0;  // theta^i
        for (std::size_t i = 0; i < coeffs_.size(); ++i) {
            drdtheta += coeffs_[i] * double(i + 1) * theta_pow;
            theta_pow *= theta;
        }
    }

    const double d2 = rho2 + z * z;
    const Eigen::RowVector3d dtheta(z * x / (rho * d2), z * y / (rho * d2), -rho / d2);
    return drdtheta * u * dtheta + r * du;
}

Vec3 FisheyeModel::unit_ray(const Vec2& pixel) const {
    const Vec2 d = pixel - center_;
    const double radius = d.norm();
    if (radius > max_radius_ * (1.0 + 1e-12) + 1e-9)
        throw OutOfFovError("pixel radius exceeds r(max_theta)");
    if (radius == 0.0) return Vec3(0.0, 0.0, 1.0);
    const double theta = theta_from_radius(std::min(radius, max_radius_));
    const double s = std::sin(theta) / radius;
    return Vec3(s * d.x(), s * d.y(), std::cos(theta));
}

Vec3 FisheyeModel::unproject(const Vec2& pixel, double ray_distance) const {
    if (!(ray_distance > 0.0)) throw NonPositiveDepthError("ray distance must be positive");
    return ray_distance * unit_ray(pixel);
}

nlohmann::json FisheyeModel::to_json() const {
    nlohmann::json doc;
    doc["kind"] = kind_ == Kind::Equidistant ? "equidistant" : "polynomial";
    if (kind_ == Kind::Equidistant)
        doc["focal"] = focal_;
    else
        doc["poly_coeffs"] = coeffs_;
    doc["center"] = {center_.x(), center_.y()};
    doc["image_size"] = {width_, height_};
    doc["max_theta_deg"] = max_theta_ * 180.0 / std::numbers::pi;
    return doc;
}

FisheyeModel FisheyeModel::from_json(const nlohmann::json& doc) {
    try {
        const std::string kind = doc.at("kind").get<std::string>();
        const auto center = doc.at("center");
        const auto size = doc.at("image_size");
        const double max_theta =
            doc.at("max_theta_deg").get<double>() * std::numbers::pi / 180.0;
        const Vec2 c(center.at(0).get<double>(), center.at(1).get<double>());
        const int w = size.at(0).get<int>();
        const int h = size.at(1).get<int>();
        if (kind == "equidistant")
            return equidistant(doc.at("focal").get<double>(), c, w, h, max_theta);
        if (kind == "polynomial")
            return polynomial(doc.at("poly_coeffs").get<std::vector<double>>(), c, w, h,
                              max_theta);
        throw ParseError("unknown camera kind: " + kind);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad calibration document: ") + e.what());
    }
}

void FisheyeModel::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << to_json().dump(2) << "\n";
}

FisheyeModel FisheyeModel::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad calibration file: ") + e.what());
    }
    return from_json(doc);
}

FisheyeModel default_test_camera() {
    return FisheyeModel::equidistant(160.0, Vec2(320.0, 320.0), 640, 640,
                                     100.0 * std::numbers::pi / 180.0);
}

}  // namespace egoscene
