// Copyright Contributors to the EgoScene Project
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>

#include "egoscene/fisheye_camera.hpp"

using namespace egoscene;

namespace {

// Hand-rolled deterministic uniforms for property tests.
struct Rng {
    std::uint64_t s;
    std::uint64_t next() {
        s += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = s;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * (double(next() >> 11) * 0x1.0p-53);
    }
};

std::filesystem::path temp_file(const char* name) {
    return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("on-axis point maps to the principal point") {
    const FisheyeModel cam = default_test_camera();
    const Vec2 px = cam.project(Vec3(0, 0, 1));
    CHECK(px.x() == doctest::Approx(320.0).epsilon(1e-12));
    CHECK(px.y() == doctest::Approx(320.0).epsilon(1e-12));
}

TEST_CASE("equidistant projection matches the closed form") {
    const FisheyeModel cam = default_test_camera();
    // 45 degree incidence: radius = focal * pi/4.
    const Vec2 px = cam.project(Vec3(1, 0, 1));
    CHECK(px.x() == doctest::Approx(320.0 + 160.0 * std::numbers::pi / 4.0).epsilon(1e-12));
    CHECK(px.y() == doctest::Approx(320.0).epsilon(1e-12));
}

TEST_CASE("projection is scale invariant") {
    const FisheyeModel cam = default_test_camera();
    Rng rng{42};
    for (int i = 0; i < 200; ++i) {
        const Vec3 p(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0.1, 3));
        const double s = rng.uniform(0.1, 10.0);
        const Vec2 a = cam.project(p);
        const Vec2 b = cam.project(s * p);
        CHECK((a - b).norm() < 1e-9);
    }
}

TEST_CASE("unproject on axis recovers depth along +z") {
    const FisheyeModel cam = default_test_camera();
    const Vec3 p = cam.unproject(Vec2(320, 320), 2.0);
    CHECK((p - Vec3(0, 0, 2)).norm() < 1e-12);
}

TEST_CASE("project/unproject round trip on a fixed point") {
    const FisheyeModel cam = default_test_camera();
    const Vec3 p(0.3, -0.5, 0.8);
    const Vec3 q = cam.unproject(cam.project(p), p.norm());
    CHECK((q - p).norm() < 1e-9);
}

TEST_CASE("round trip over random in-fov pixels, norm preserved exactly") {
    const FisheyeModel cam = default_test_camera();
    Rng rng{7};
    for (int i = 0; i < 2000; ++i) {
        const double r = cam.max_radius() * std::sqrt(rng.uniform(0, 1));
        const double phi = rng.uniform(0, 2 * std::numbers::pi);
        const Vec2 px = cam.center() + r * Vec2(std::cos(phi), std::sin(phi));
        const double d = rng.uniform(0.05, 10.0);
        const Vec3 p = cam.unproject(px, d);
        CHECK(std::abs(p.norm() - d) < 1e-12 * d);
        CHECK((cam.project(p) - px).norm() < 1e-6);
    }
}

TEST_CASE("radius function is strictly monotone up to max_theta") {
    const FisheyeModel cam = default_test_camera();
    double prev = -1.0;
    for (int i = 0; i <= 500; ++i) {
        const double r = cam.radius_at(cam.max_theta() * i / 500);
        CHECK(r > prev);
        prev = r;
    }
}

TEST_CASE("fov and degenerate errors") {
    const FisheyeModel cam = default_test_camera();
    CHECK_THROWS_AS(cam.project(Vec3(0, 0, -1)), OutOfFovError);       // 180 deg > 100 deg
    CHECK_THROWS_AS(cam.project(Vec3(1, 0, -0.1)), OutOfFovError);     // just past the fov
    CHECK_THROWS_AS(cam.project(Vec3(0, 0, 0)), DegenerateRayError);
    CHECK_THROWS_AS(cam.unproject(Vec2(320, 320), 0.0), NonPositiveDepthError);
    CHECK_THROWS_AS(cam.unproject(Vec2(320, 320), -1.0), NonPositiveDepthError);
    CHECK_THROWS_AS(cam.unproject(Vec2(320 + cam.max_radius() + 1.0, 320), 1.0), OutOfFovError);
    CHECK(!cam.try_project(Vec3(0, 0, -1)).has_value());
}

TEST_CASE("polynomial model with the equidistant term matches the equidistant oracle") {
    const FisheyeModel eq = default_test_camera();
    const FisheyeModel poly = FisheyeModel::polynomial({160.0}, Vec2(320, 320), 640, 640,
                                                       100.0 * std::numbers::pi / 180.0);
    Rng rng{3};
    for (int i = 0; i < 200; ++i) {
        // theta <= 0.5 rad
        const double theta = rng.uniform(0.001, 0.5);
        const double phi = rng.uniform(0, 2 * std::numbers::pi);
        const Vec3 p(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                     std::cos(theta));
        CHECK((eq.project(p) - poly.project(p)).norm() < 1e-4);
        const Vec3 a = eq.unproject(eq.project(p), 2.0);
        const Vec3 b = poly.unproject(poly.project(p), 2.0);
        CHECK((a - b).norm() < 1e-4);
    }
}

TEST_CASE("polynomial inversion round trips through bisection") {
    const FisheyeModel poly = FisheyeModel::polynomial({150.0, 10.0, -8.0}, Vec2(320, 320), 640,
                                                       640, 100.0 * std::numbers::pi / 180.0);
    Rng rng{11};
    for (int i = 0; i < 300; ++i) {
        const double r = poly.max_radius() * std::sqrt(rng.uniform(0, 1));
        const double phi = rng.uniform(0, 2 * std::numbers::pi);
        const Vec2 px = poly.center() + r * Vec2(std::cos(phi), std::sin(phi));
        const Vec3 p = poly.unproject(px, 1.5);
        CHECK((poly.project(p) - px).norm() < 1e-6);
    }
}

TEST_CASE("non-monotone polynomial is rejected at construction") {
    // r(theta) = theta - 10 theta^3 decreases past ~0.18 rad.
    CHECK_THROWS_AS(FisheyeModel::polynomial({1.0, 0.0, -10.0}, Vec2(320, 320), 640, 640,
                                             100.0 * std::numbers::pi / 180.0),
                    InvalidCalibrationError);
}

TEST_CASE("invalid construction parameters are rejected") {
    CHECK_THROWS_AS(FisheyeModel::equidistant(160, Vec2(700, 320), 640, 640, 1.0),
                    InvalidCalibrationError);  // center outside image
    CHECK_THROWS_AS(FisheyeModel::equidistant(160, Vec2(320, 320), 640, 640, 0.0),
                    InvalidCalibrationError);  // max_theta out of range
    CHECK_THROWS_AS(FisheyeModel::equidistant(160, Vec2(320, 320), 640, 640, 4.0),
                    InvalidCalibrationError);
    CHECK_THROWS_AS(FisheyeModel::equidistant(-160, Vec2(320, 320), 640, 640, 1.0),
                    InvalidCalibrationError);
}

TEST_CASE("calibration document round trip") {
    const auto path = temp_file("egoscene_calib_test.json");

    const FisheyeModel cam = default_test_camera();
    cam.save(path);
    const FisheyeModel back = FisheyeModel::load(path);
    CHECK(back == cam);

    const FisheyeModel poly = FisheyeModel::polynomial({150.0, 10.0, -8.0}, Vec2(310.5, 330.25),
                                                       640, 640, 1.6);
    poly.save(path);
    CHECK(FisheyeModel::load(path) == poly);
    std::filesystem::remove(path);
}

TEST_CASE("minimal equidistant document parses") {
    const auto doc = nlohmann::json::parse(R"({
      "kind": "equidistant", "focal": 160.0, "center": [320, 320],
      "image_size": [640, 640], "max_theta_deg": 100.0
    })");
    const FisheyeModel cam = FisheyeModel::from_json(doc);
    CHECK(cam.kind() == FisheyeModel::Kind::Equidistant);
    CHECK(cam == default_test_camera());
}

TEST_CASE("malformed documents raise ParseError") {
    CHECK_THROWS_AS(FisheyeModel::from_json(nlohmann::json::parse(R"({"kind":"equidistant"})")),
                    ParseError);
    CHECK_THROWS_AS(FisheyeModel::from_json(nlohmann::json::parse(R"({"kind":"cube","focal":1,
        "center":[0,0],"image_size":[10,10],"max_theta_deg":90})")),
                    ParseError);
}

TEST_CASE("projection jacobian matches central differences") {
    const FisheyeModel cam = default_test_camera();
    Rng rng{21};
    const double h = 1e-6;
    for (int i = 0; i < 50; ++i) {
        const Vec3 p(rng.uniform(-0.8, 0.8), rng.uniform(-0.8, 0.8), rng.uniform(0.3, 2.0));
        const Mat23 jac = cam.projection_jacobian(p);
        for (int a = 0; a < 3; ++a) {
            Vec3 dp = Vec3::Zero();
            dp[a] = h;
            const Vec2 fd = (cam.project_clamped(p + dp) - cam.project_clamped(p - dp)) / (2 * h);
            CHECK((fd - jac.col(a)).norm() < 1e-4 * std::max(1.0, fd.norm()));
        }
    }
}

TEST_CASE("clamped projection is continuous at the fov edge and radially frozen beyond") {
    const FisheyeModel cam = default_test_camera();
    const double t = cam.max_theta();
    const Vec3 just_in(std::sin(t - 1e-9), 0, std::cos(t - 1e-9));
    const Vec3 just_out(std::sin(t + 1e-9), 0, std::cos(t + 1e-9));
    CHECK((cam.project_clamped(just_in) - cam.project_clamped(just_out)).norm() < 1e-5);

    const Vec3 far_out(std::sin(t + 0.3), 0, std::cos(t + 0.3));
    CHECK((cam.project_clamped(just_out) - cam.project_clamped(far_out)).norm() < 1e-6);
}
