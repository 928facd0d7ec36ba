// Copyright Contributors to the EgoScene Project
// SPDX-License-Identifier: Apache-2.0

#include "egoscene/pose.hpp"

#include <fstream>

#include "egoscene/errors.hpp"

namespace egoscene {

nlohmann::json Pose::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (std::size_t i = 0; i < joints.size(); ++i) {
        arr.push_back({{"joint_name", joint_names[i]},
                       {"xyz_m", {joints[i].x(), joints[i].y(), joints[i].z()}}});
    }
    return arr;
}

Pose Pose::from_json(const nlohmann::json& doc) {
    try {
        Pose p;
        for (const auto& item : doc) {
            p.joint_names.push_back(item.at("joint_name").get<std::string>());
            const auto& xyz = item.at("xyz_m");
            p.joints.emplace_back(xyz.at(0).get<double>(), xyz.at(1).get<double>(),
                                  xyz.at(2).get<double>());
        }
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad pose document: ") + e.what());
    }
}

void Pose::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << to_json().dump(2) << "\n";
}

Pose Pose::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad pose file: ") + e.what());
    }
    return from_json(doc);
}

nlohmann::json Keypoints2D::to_json(const std::vector<std::string>& joint_names) const {
    nlohmann::json arr = nlohmann::json::array();
    for (std::size_t i = 0; i < uv.size(); ++i) {
        arr.push_back({{"joint_name", joint_names[i]},
                       {"uv_px", {uv[i].x(), uv[i].y()}},
                       {"confidence", confidence[i]}});
    }
    return arr;
}

Keypoints2D Keypoints2D::from_json(const nlohmann::json& doc) {
    try {
        Keypoints2D k;
        for (const auto& item : doc) {
            const auto& uv = item.at("uv_px");
            k.uv.emplace_back(uv.at(0).get<double>(), uv.at(1).get<double>());
            k.confidence.push_back(item.value("confidence", 1.0));
        }
        return k;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad detections document: ") + e.what());
    }
}

void Keypoints2D::save(const std::filesystem::path& path,
                       const std::vector<std::string>& joint_names) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << to_json(joint_names).dump(2) << "\n";
}

Keypoints2D Keypoints2D::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad detections file: ") + e.what());
    }
    return from_json(doc);
}

void BoneTemplate::validate() const {
    if (parent.size() != length.size()) throw InvalidTemplateError("parent/length size mismatch");
    if (parent.empty()) throw InvalidTemplateError("empty template");
    int roots = 0;
    for (std::size_t j = 0; j < parent.size(); ++j) {
        if (parent[j] < 0) {
            ++roots;
            continue;
        }
        if (parent[j] >= static_cast<int>(parent.size()))
            throw InvalidTemplateError("parent index out of range");
        if (!(length[j] > 0.0)) throw InvalidTemplateError("bone lengths must be positive");
        // Walk up; a cycle would never reach a root within size() steps.
        int hops = 0, p = parent[j];
        while (p >= 0) {
            p = parent[static_cast<std::size_t>(p)];
            if (++hops > static_cast<int>(parent.size()))
                throw InvalidTemplateError("template contains a cycle");
        }
    }
    if (roots != 1) throw InvalidTemplateError("template must have exactly one root");
}

namespace skeleton {

const std::vector<std::string>& joint_names() {
    static const std::vector<std::string> names = {
        "neck",
        "right_shoulder", "right_elbow", "right_wrist",
        "left_shoulder", "left_elbow", "left_wrist",
        "right_hip", "right_knee", "right_ankle", "right_foot",
        "left_hip", "left_knee", "left_ankle", "left_foot"};
    return names;
}

const std::vector<int>& parents() {
    // neck is the root; hips attach to the neck.
    static const std::vector<int> p = {-1, 0, 1, 2, 0, 4, 5, 0, 7, 8, 9, 0, 11, 12, 13};
    return p;
}

const std::vector<double>& bone_lengths() {
    static const std::vector<double> l = {
        0.0,               // neck (root)
        0.18, 0.28, 0.25,  // right shoulder, elbow, wrist
        0.18, 0.28, 0.25,  // left shoulder, elbow, wrist
        0.52, 0.40, 0.40, 0.15,  // right hip, knee, ankle, foot
        0.52, 0.40, 0.40, 0.15   // left hip, knee, ankle, foot
    };
    return l;
}

BoneTemplate bone_template() {
    BoneTemplate t{parents(), bone_lengths()};
    return t;
}

int joint_index(const std::string& name) {
    const auto& names = joint_names();
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return static_cast<int>(i);
    throw InvalidSpecError("unknown joint name: " + name);
}

int joint_count() { return static_cast<int>(joint_names().size()); }

}  // namespace skeleton

Pose make_default_pose(const Vec3& fill) {
    Pose p;
    p.joint_names = skeleton::joint_names();
    p.joints.assign(p.joint_names.size(), fill);
    return p;
}

}  // namespace egoscene
