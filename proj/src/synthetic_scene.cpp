// Copyright Contributors to the EgoScene Project
// SPDX-License-Identifier: Apache-2.0

#include "egoscene/synthetic_scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "egoscene/errors.hpp"
#include "egoscene/tensor_io.hpp"

namespace egoscene {

namespace {

constexpr double kRayEps = 1e-7;  // ignore self-hits at the ray origin

// Deterministic across platforms (unlike <random> distributions).
struct Rng {
    std::uint64_t state;

    explicit Rng(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        state += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * (double(next() >> 11) * 0x1.0p-53);
    }
};

std::optional<double> intersect_plane(const Plane& pl, const Vec3& o, const Vec3& d) {
    const double denom = pl.normal.dot(d);
    if (std::abs(denom) < 1e-12) return std::nullopt;
    const double t = (pl.offset - pl.normal.dot(o)) / denom;
    return t > kRayEps ? std::optional<double>(t) : std::nullopt;
}

std::optional<double> intersect_box(const AxisBox& box, const Vec3& o, const Vec3& d) {
    double tmin = -std::numeric_limits<double>::infinity();
    double tmax = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 3; ++a) {
        if (std::abs(d[a]) < 1e-15) {
            if (o[a] < box.min[a] || o[a] > box.max[a]) return std::nullopt;
            continue;
        }
        double t0 = (box.min[a] - o[a]) / d[a];
        double t1 = (box.max[a] - o[a]) / d[a];
        if (t0 > t1) std::swap(t0, t1);
        tmin = std::max(tmin, t0);
        tmax = std::min(tmax, t1);
        if (tmin > tmax) return std::nullopt;
    }
    if (tmin > kRayEps) return tmin;
    if (tmax > kRayEps) return tmax;  // origin inside the box
    return std::nullopt;
}

std::optional<double> intersect_sphere(const Vec3& c, double r, const Vec3& o, const Vec3& d) {
    const Vec3 oc = o - c;
    const double b = oc.dot(d);
    const double disc = b * b - (oc.squaredNorm() - r * r);
    if (disc < 0.0) return std::nullopt;
    const double s = std::sqrt(disc);
    if (-b - s > kRayEps) return -b - s;
    if (-b + s > kRayEps) return -b + s;
    return std::nullopt;
}

std::optional<double> intersect_capsule(const CapsuleShape& cap, const Vec3& o, const Vec3& d) {
    const Vec3 ba = cap.b - cap.a;
    const double baba = ba.squaredNorm();
    if (baba < 1e-18) return intersect_sphere(cap.a, cap.radius, o, d);

    const Vec3 oa = o - cap.a;
    const double bard = ba.dot(d);
    const double baoa = ba.dot(oa);
    const double rdoa = d.dot(oa);
    const double oaoa = oa.squaredNorm();

    // Infinite cylinder around the segment, then clamp to the caps.
    const double A = baba - bard * bard;
    const double B = baba * rdoa - baoa * bard;
    const double C = baba * oaoa - baoa * baoa - cap.radius * cap.radius * baba;
    std::optional<double> best;
    auto consider = [&](double t) {
        if (t > kRayEps && (!best || t < *best)) best = t;
    };
    if (A > 1e-15) {
        const double h = B * B - A * C;
        if (h >= 0.0) {
            const double s = std::sqrt(h);
            for (const double t : {(-B - s) / A, (-B + s) / A}) {
                const double y = baoa + t * bard;
                if (y >= 0.0 && y <= baba) consider(t);
            }
        }
    }
    if (auto t = intersect_sphere(cap.a, cap.radius, o, d)) consider(*t);
    if (auto t = intersect_sphere(cap.b, cap.radius, o, d)) consider(*t);
    return best;
}

}  // namespace

void SceneModel::validate() const {
    bool has_scene = false;
    for (const ScenePrimitive& prim : primitives) {
        if (prim.material == Material::Scene) has_scene = true;
        if (const auto* pl = std::get_if<Plane>(&prim.shape)) {
            if (std::abs(pl->normal.norm() - 1.0) > 1e-9)
                throw InvalidSpecError("plane normal must be unit length");
        } else if (const auto* bx = std::get_if<AxisBox>(&prim.shape)) {
            if ((bx->max - bx->min).minCoeff() <= 0.0)
                throw InvalidSpecError("box must have positive extent");
        } else if (const auto* cp = std::get_if<CapsuleShape>(&prim.shape)) {
            if (!(cp->radius > 0.0)) throw InvalidSpecError("capsule radius must be positive");
        }
    }
    if (!has_scene) throw InvalidSpecError("scene needs at least one scene primitive");
}

std::optional<RayHit> raycast(const SceneModel& scene, const Vec3& origin, const Vec3& dir,
                              bool include_body) {
    std::optional<RayHit> best;
    for (std::size_t i = 0; i < scene.primitives.size(); ++i) {
        const ScenePrimitive& prim = scene.primitives[i];
        if (!include_body && prim.material == Material::Body) continue;
        std::optional<double> t;
        if (const auto* pl = std::get_if<Plane>(&prim.shape))
            t = intersect_plane(*pl, origin, dir);
        else if (const auto* bx = std::get_if<AxisBox>(&prim.shape))
            t = intersect_box(*bx, origin, dir);
        else
            t = intersect_capsule(std::get<CapsuleShape>(prim.shape), origin, dir);
        if (t && (!best || *t < best->t)) best = RayHit{*t, static_cast<int>(i), prim.material};
    }
    return best;
}

DepthMap raycast_depth(const FisheyeModel& model, const SceneModel& scene, bool include_body) {
    scene.validate();
    DepthMap depth = DepthMap::invalid_map(model.image_width(), model.image_height());
    const double max_r2 = model.max_radius() * model.max_radius();
    for (int y = 0; y < depth.height; ++y)
        for (int x = 0; x < depth.width; ++x) {
            const Vec2 px(double(x), double(y));
            if ((px - model.center()).squaredNorm() > max_r2) continue;
            const Vec3 dir = scene.camera.to_world_dir(model.unit_ray(px));
            if (const auto hit = raycast(scene, scene.camera.position, dir, include_body))
                depth.set(x, y, static_cast<float>(hit->t));
        }
    return depth;
}

SegMask render_body_mask(const FisheyeModel& model, const SceneModel& scene) {
    scene.validate();
    SegMask mask = SegMask::zeros(model.image_width(), model.image_height());
    const double max_r2 = model.max_radius() * model.max_radius();
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x) {
            const Vec2 px(double(x), double(y));
            if ((px - model.center()).squaredNorm() > max_r2) continue;
            const Vec3 dir = scene.camera.to_world_dir(model.unit_ray(px));
            const auto hit = raycast(scene, scene.camera.position, dir, true);
            if (hit && hit->material == Material::Body) mask.set(x, y, 1);
        }
    return mask;
}

// ---------------------------------------------------------------------------

void RoomSpec::validate() const {
    if (!(half_extent > 0.0) || !(wall_height > 0.0))
        throw InvalidSpecError("room dimensions must be positive");
    for (const AxisBox& b : furniture)
        if ((b.max - b.min).minCoeff() <= 0.0)
            throw InvalidSpecError("furniture boxes must have positive extent");
}

SceneModel build_room(const RoomSpec& spec) {
    spec.validate();
    SceneModel scene;
    scene.primitives.push_back({Plane{Vec3(0, 0, 1), 0.0}, Material::Scene});
    if (spec.walls) {
        scene.primitives.push_back({Plane{Vec3(1, 0, 0), spec.half_extent}, Material::Scene});
        scene.primitives.push_back({Plane{Vec3(1, 0, 0), -spec.half_extent}, Material::Scene});
        scene.primitives.push_back({Plane{Vec3(0, 1, 0), spec.half_extent}, Material::Scene});
        scene.primitives.push_back({Plane{Vec3(0, 1, 0), -spec.half_extent}, Material::Scene});
    }
    if (spec.ceiling)
        scene.primitives.push_back({Plane{Vec3(0, 0, 1), spec.wall_height}, Material::Scene});
    for (const AxisBox& b : spec.furniture) scene.primitives.push_back({b, Material::Scene});
    return scene;
}

std::string to_string(PoseKind kind) {
    switch (kind) {
        case PoseKind::Standing: return "standing";
        case PoseKind::Sitting: return "sitting";
        case PoseKind::Squatting: return "squatting";
    }
    return "standing";
}

PoseKind pose_kind_from_string(const std::string& s) {
    if (s == "standing") return PoseKind::Standing;
    if (s == "sitting") return PoseKind::Sitting;
    if (s == "squatting") return PoseKind::Squatting;
    throw InvalidSpecError("unknown pose kind: " + s);
}

SampledBody sample_pose(const PoseSpec& spec) {
    if (!(spec.body_scale > 0.0)) throw InvalidSpecError("body scale must be positive");
    if (spec.kind == PoseKind::Sitting && !(spec.seat_height > 0.0))
        throw InvalidSpecError("seat height must be positive");

    Rng rng(spec.seed);
    const double jit = spec.jitter;
    const double arm_swing_r = rng.uniform(-0.35, 0.35) * jit;
    const double arm_swing_l = rng.uniform(-0.35, 0.35) * jit;
    const double torso_lean = rng.uniform(-0.12, 0.12) * jit;
    const double cam_pitch = rng.uniform(-0.10, 0.10) * jit;

    const double s = spec.body_scale;
    const auto& L = skeleton::bone_lengths();
    const Vec3 up(0, 0, 1);
    const Vec3 fwd(std::cos(spec.yaw), std::sin(spec.yaw), 0);
    const Vec3 right = fwd.cross(up);
    const Vec3 base(spec.offset.x(), spec.offset.y(), 0.0);

    using namespace skeleton;
    const int kNeck = joint_index("neck");
    const int kRSho = joint_index("right_shoulder"), kREl = joint_index("right_elbow"),
              kRWr = joint_index("right_wrist");
    const int kLSho = joint_index("left_shoulder"), kLEl = joint_index("left_elbow"),
              kLWr = joint_index("left_wrist");
    const int kRHip = joint_index("right_hip"), kRKnee = joint_index("right_knee"),
              kRAnk = joint_index("right_ankle"), kRFt = joint_index("right_foot");
    const int kLHip = joint_index("left_hip"), kLKnee = joint_index("left_knee"),
              kLAnk = joint_index("left_ankle"), kLFt = joint_index("left_foot");

    const double hip_half = 0.10 * s;
    const double thigh = L[kRKnee] * s, shank = L[kRAnk] * s, foot_len = L[kRFt] * s;
    const double hip_bone = L[kRHip] * s;

    double hip_z = 0.0;
    switch (spec.kind) {
        case PoseKind::Standing: hip_z = thigh + shank; break;
        case PoseKind::Sitting: hip_z = spec.seat_height; break;
        case PoseKind::Squatting: hip_z = 0.35 * s; break;
    }

    Pose pose = make_default_pose();
    const Vec3 hip_mid = base + hip_z * up;
    pose.joints[kRHip] = hip_mid + hip_half * right;
    pose.joints[kLHip] = hip_mid - hip_half * right;

    // Neck at the exact hip-bone length from both hips; leaning tilts it in
    // the forward/up plane, which preserves both distances.
    const double neck_rise = std::sqrt(hip_bone * hip_bone - hip_half * hip_half);
    const Vec3 lean_dir = std::cos(torso_lean) * up + std::sin(torso_lean) * fwd;
    pose.joints[kNeck] = hip_mid + neck_rise * lean_dir;

    auto place_leg = [&](int hip, int knee, int ankle, int ft) {
        const Vec3& h = pose.joints[hip];
        Vec3 k;
        switch (spec.kind) {
            case PoseKind::Standing: k = h - thigh * up; break;
            case PoseKind::Sitting:
            case PoseKind::Squatting: k = h + thigh * fwd; break;
        }
        // Shank reaches the floor when it can; otherwise it hangs straight.
        const double drop = std::min(k.z(), shank);
        const double back = std::sqrt(std::max(0.0, shank * shank - drop * drop));
        pose.joints[knee] = k;
        pose.joints[ankle] = k - back * fwd - drop * up;
        pose.joints[ft] = pose.joints[ankle] + foot_len * fwd;
    };
    place_leg(kRHip, kRKnee, kRAnk, kRFt);
    place_leg(kLHip, kLKnee, kLAnk, kLFt);

    auto place_arm = [&](int sho, int el, int wr, double side, double swing) {
        pose.joints[sho] = pose.joints[kNeck] + side * L[sho] * s * right;
        const Vec3 hang = std::cos(swing) * (-up) + std::sin(swing) * fwd;
        pose.joints[el] = pose.joints[sho] + L[el] * s * hang;
        pose.joints[wr] = pose.joints[el] + L[wr] * s * hang;
    };
    place_arm(kRSho, kREl, kRWr, +1.0, arm_swing_r);
    place_arm(kLSho, kLEl, kLWr, -1.0, arm_swing_l);

    SampledBody body;
    body.pose_world = pose;

    // Capsules along every bone. Radii by body part, meters.
    const auto& parents = skeleton::parents();
    auto bone_radius = [&](int j) {
        if (j == kRHip || j == kLHip) return 0.09;           // torso sides
        if (j == kRSho || j == kLSho) return 0.055;
        if (j == kREl || j == kLEl) return 0.045;
        if (j == kRWr || j == kLWr) return 0.04;
        if (j == kRKnee || j == kLKnee) return 0.07;         // thighs
        if (j == kRAnk || j == kLAnk) return 0.055;          // shanks
        return 0.04;                                         // feet
    };
    for (int j = 0; j < pose.size(); ++j) {
        if (parents[j] < 0) continue;
        body.capsules.push_back(
            {pose.joints[parents[j]], pose.joints[j], bone_radius(j) * s});
    }

    // Camera rigidly above the neck, looking down along the body.
    body.camera.position = pose.joints[kNeck] + 0.20 * s * up;
    const Vec3 cam_fwd = std::cos(cam_pitch) * (-up) + std::sin(cam_pitch) * fwd;
    // Columns are the camera axes in world coordinates; image +y completes
    // the right-handed frame: y = z cross x.
    Mat3 R;
    R.col(0) = right;
    R.col(1) = cam_fwd.cross(right);
    R.col(2) = cam_fwd;
    body.camera.world_from_camera = R;
    return body;
}

Pose pose_to_camera_frame(const Pose& world, const CameraRig& rig) {
    Pose out = world;
    for (Vec3& p : out.joints) p = rig.to_camera(p);
    return out;
}

// ---------------------------------------------------------------------------
// JSON round trips.

namespace {

nlohmann::json vec3_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }
Vec3 vec3_from(const nlohmann::json& j) {
    return Vec3(j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>());
}

}  // namespace

nlohmann::json SceneModel::to_json() const {
    nlohmann::json prims = nlohmann::json::array();
    for (const ScenePrimitive& p : primitives) {
        nlohmann::json j;
        j["material"] = p.material == Material::Body ? "body" : "scene";
        if (const auto* pl = std::get_if<Plane>(&p.shape)) {
            j["type"] = "plane";
            j["normal"] = vec3_json(pl->normal);
            j["offset"] = pl->offset;
        } else if (const auto* bx = std::get_if<AxisBox>(&p.shape)) {
            j["type"] = "box";
            j["min"] = vec3_json(bx->min);
            j["max"] = vec3_json(bx->max);
        } else {
            const auto& cp = std::get<CapsuleShape>(p.shape);
            j["type"] = "capsule";
            j["a"] = vec3_json(cp.a);
            j["b"] = vec3_json(cp.b);
            j["radius"] = cp.radius;
        }
        prims.push_back(j);
    }
    nlohmann::json doc;
    doc["primitives"] = prims;
    doc["camera"] = {{"position", vec3_json(camera.position)},
                     {"rotation", {vec3_json(camera.world_from_camera.col(0)),
                                   vec3_json(camera.world_from_camera.col(1)),
                                   vec3_json(camera.world_from_camera.col(2))}}};
    return doc;
}

SceneModel SceneModel::from_json(const nlohmann::json& doc) {
    try {
        SceneModel scene;
        for (const auto& j : doc.at("primitives")) {
            ScenePrimitive p;
            p.material = j.at("material").get<std::string>() == "body" ? Material::Body
                                                                       : Material::Scene;
            const std::string type = j.at("type").get<std::string>();
            if (type == "plane")
                p.shape = Plane{vec3_from(j.at("normal")), j.at("offset").get<double>()};
            else if (type == "box")
                p.shape = AxisBox{vec3_from(j.at("min")), vec3_from(j.at("max"))};
            else if (type == "capsule")
                p.shape = CapsuleShape{vec3_from(j.at("a")), vec3_from(j.at("b")),
                                       j.at("radius").get<double>()};
            else
                throw ParseError("unknown primitive type: " + type);
            scene.primitives.push_back(p);
        }
        if (doc.contains("camera")) {
            scene.camera.position = vec3_from(doc.at("camera").at("position"));
            const auto& rot = doc.at("camera").at("rotation");
            for (int c = 0; c < 3; ++c) scene.camera.world_from_camera.col(c) = vec3_from(rot.at(c));
        }
        return scene;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad scene document: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Dataset generation.

nlohmann::json Manifest::to_json() const {
    nlohmann::json doc;
    doc["seed"] = seed;
    doc["calibration"] = calibration;
    nlohmann::json arr = nlohmann::json::array();
    for (const FrameRecord& f : frames) {
        arr.push_back({{"id", f.id},
                       {"kind", f.kind},
                       {"depth_body", f.depth_body},
                       {"depth_scene", f.depth_scene},
                       {"seg_mask", f.seg_mask},
                       {"pose", f.pose}});
    }
    doc["frames"] = arr;
    return doc;
}

Manifest Manifest::from_json(const nlohmann::json& doc) {
    try {
        Manifest m;
        m.seed = doc.at("seed").get<std::uint64_t>();
        m.calibration = doc.at("calibration").get<std::string>();
        for (const auto& j : doc.at("frames")) {
            FrameRecord f;
            f.id = j.at("id").get<int>();
            f.kind = j.at("kind").get<std::string>();
            f.depth_body = j.at("depth_body").get<std::string>();
            f.depth_scene = j.at("depth_scene").get<std::string>();
            f.seg_mask = j.at("seg_mask").get<std::string>();
            f.pose = j.at("pose").get<std::string>();
            m.frames.push_back(f);
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad manifest: ") + e.what());
    }
}

void Manifest::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << to_json().dump(2) << "\n";
}

Manifest Manifest::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad manifest file: ") + e.what());
    }
    return from_json(doc);
}

Manifest generate_dataset(const DatasetSpec& spec, int count,
                          const std::filesystem::path& out_dir) {
    if (count <= 0) throw InvalidSpecError("frame count must be positive");
    if (spec.kinds.empty()) throw InvalidSpecError("dataset needs at least one pose kind");
    spec.room.validate();
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir.string());

    Manifest manifest;
    manifest.seed = spec.seed;
    manifest.calibration = "calibration.json";
    spec.calibration.save(out_dir / manifest.calibration);

    char name[64];
    for (int i = 0; i < count; ++i) {
        Rng frame_rng(spec.seed ^ (0x51ed270b0059ull + std::uint64_t(i) * 0x2545f4914f6cdd1dull));
        PoseSpec ps;
        ps.kind = spec.kinds[std::size_t(i) % spec.kinds.size()];
        ps.offset = Vec2(frame_rng.uniform(-0.4, 0.4), frame_rng.uniform(-0.4, 0.4));
        ps.yaw = frame_rng.uniform(-3.141592653589793, 3.141592653589793);
        ps.seed = frame_rng.next();
        ps.jitter = spec.jitter;

        const SampledBody body = sample_pose(ps);

        RoomSpec room = spec.room;
        if (ps.kind == PoseKind::Sitting) {
            // Seat under the hips, top face exactly at the hip height.
            const Vec3 fwd(std::cos(ps.yaw), std::sin(ps.yaw), 0);
            const Vec3 hip_mid(ps.offset.x(), ps.offset.y(), 0.0);
            const Vec3 c = hip_mid - 0.05 * fwd;
            room.furniture.push_back(AxisBox{Vec3(c.x() - 0.25, c.y() - 0.25, 0.0),
                                             Vec3(c.x() + 0.25, c.y() + 0.25, ps.seat_height)});
        }
        SceneModel scene = build_room(room);
        scene.camera = body.camera;
        for (const CapsuleShape& cap : body.capsules)
            scene.primitives.push_back({cap, Material::Body});

        const DepthMap depth_body = raycast_depth(spec.calibration, scene, true);
        const DepthMap depth_scene = raycast_depth(spec.calibration, scene, false);
        const SegMask mask = render_body_mask(spec.calibration, scene);
        const Pose pose_cam = pose_to_camera_frame(body.pose_world, body.camera);

        FrameRecord rec;
        rec.id = i;
        rec.kind = to_string(ps.kind);
        std::snprintf(name, sizeof(name), "frame_%04d", i);
        rec.depth_body = std::string(name) + "_depth_body.vol";
        rec.depth_scene = std::string(name) + "_depth_scene.vol";
        rec.seg_mask = std::string(name) + "_mask.pgm";
        rec.pose = std::string(name) + "_pose.json";
        save_tensor(out_dir / rec.depth_body, to_tensor(depth_body));
        save_tensor(out_dir / rec.depth_scene, to_tensor(depth_scene));
        write_mask_pgm8(out_dir / rec.seg_mask, mask);
        pose_cam.save(out_dir / rec.pose);
        manifest.frames.push_back(rec);
    }
    manifest.save(out_dir / "manifest.json");
    return manifest;
}

}  // namespace egoscene
