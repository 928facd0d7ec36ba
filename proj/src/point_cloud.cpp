// Copyright Contributors to the EgoScene Project
// SPDX-License-Identifier: Apache-2.0

#include "egoscene/point_cloud.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "egoscene/errors.hpp"

namespace egoscene {

void write_ply(const std::filesystem::path& path, const PointCloud& cloud) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "ply\nformat ascii 1.0\n";
    out << "element vertex " << cloud.size() << "\n";
    out << "property double x\nproperty double y\nproperty double z\n";
    out << "end_header\n";
    char line[96];
    for (const Vec3& p : cloud) {
        std::snprintf(line, sizeof(line), "%.17g %.17g %.17g\n", p.x(), p.y(), p.z());
        out << line;
    }
    if (!out) throw IoError("write failed for " + path.string());
}

PointCloud read_ply(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());

    std::string line;
    if (!std::getline(in, line) || line.substr(0, 3) != "ply")
        throw ParseError("not a PLY file: " + path.string());

    std::size_t vertex_count = 0;
    bool in_vertex_element = false;
    int x_col = -1, y_col = -1, z_col = -1, n_props = 0;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string tok;
        ls >> tok;
        if (tok == "comment") continue;
        if (tok == "format") {
            std::string fmt;
            ls >> fmt;
            if (fmt != "ascii") throw ParseError("only ascii PLY is supported");
        } else if (tok == "element") {
            std::string name;
            std::size_t count;
            ls >> name >> count;
            in_vertex_element = (name == "vertex");
            if (in_vertex_element) vertex_count = count;
        } else if (tok == "property" && in_vertex_element) {
            std::string type, name;
            ls >> type >> name;
            if (name == "x") x_col = n_props;
            if (name == "y") y_col = n_props;
            if (name == "z") z_col = n_props;
            ++n_props;
        } else if (tok == "end_header") {
            break;
        }
    }
    if (x_col < 0 || y_col < 0 || z_col < 0)
        throw ParseError("PLY vertex element lacks x/y/z properties");

    PointCloud cloud;
    cloud.reserve(vertex_count);
    std::vector<double> row(n_props);
    for (std::size_t i = 0; i < vertex_count; ++i) {
        if (!std::getline(in, line)) throw ParseError("PLY truncated vertex data");
        std::istringstream ls(line);
        for (int c = 0; c < n_props; ++c)
            if (!(ls >> row[c])) throw ParseError("PLY bad vertex row");
        cloud.emplace_back(row[x_col], row[y_col], row[z_col]);
    }
    return cloud;
}

}  // namespace egoscene
