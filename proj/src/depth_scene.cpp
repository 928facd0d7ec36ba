// Copyright Contributors to the EgoScene Project
// SPDX-License-Identifier: Apache-2.0

#include "egoscene/depth_scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "egoscene/errors.hpp"
#include "egoscene/tensor_io.hpp"

namespace egoscene {

DepthMap DepthMap::invalid_map(int width, int height) {
    DepthMap d;
    d.width = width;
    d.height = height;
    d.value.assign(static_cast<std::size_t>(width) * height, 0.0f);
    d.valid.assign(static_cast<std::size_t>(width) * height, 0);
    return d;
}

DepthMap DepthMap::constant(int width, int height, float depth) {
    DepthMap d = invalid_map(width, height);
    d.value.assign(d.value.size(), depth);
    d.valid.assign(d.valid.size(), 1);
    return d;
}

std::size_t DepthMap::valid_count() const {
    std::size_t n = 0;
    for (std::uint8_t v : valid) n += v;
    return n;
}

SegMask SegMask::zeros(int width, int height) {
    SegMask m;
    m.width = width;
    m.height = height;
    m.mask.assign(static_cast<std::size_t>(width) * height, 0);
    return m;
}

std::size_t SegMask::count() const {
    std::size_t n = 0;
    for (std::uint8_t v : mask) n += v;
    return n;
}

PointCloud depth_to_pointcloud(const FisheyeModel& model, const DepthMap& depth) {
    PointCloud cloud;
    cloud.reserve(depth.valid_count());
    const double max_r2 = model.max_radius() * model.max_radius();
    for (int y = 0; y < depth.height; ++y)
        for (int x = 0; x < depth.width; ++x) {
            if (!depth.is_valid(x, y)) continue;
            const Vec2 px(double(x), double(y));
            if ((px - model.center()).squaredNorm() > max_r2) continue;
            cloud.push_back(model.unproject(px, depth.at(x, y)));
        }
    return cloud;
}

DepthMap mask_depth(const DepthMap& depth_with_body, const SegMask& seg) {
    if (depth_with_body.width != seg.width || depth_with_body.height != seg.height)
        throw ShapeMismatchError("depth and mask dimensions differ");
    DepthMap out = depth_with_body;
    for (std::size_t i = 0; i < out.valid.size(); ++i) {
        if (seg.mask[i]) {
            out.valid[i] = 0;
            out.value[i] = 0.0f;
        }
    }
    return out;
}

namespace {

std::vector<std::uint8_t> dilate(const SegMask& seg, int radius) {
    std::vector<std::uint8_t> out(seg.mask.size(), 0);
    for (int y = 0; y < seg.height; ++y)
        for (int x = 0; x < seg.width; ++x) {
            if (!seg.at(x, y)) continue;
            const int x0 = std::max(0, x - radius), x1 = std::min(seg.width - 1, x + radius);
            const int y0 = std::max(0, y - radius), y1 = std::min(seg.height - 1, y + radius);
            for (int yy = y0; yy <= y1; ++yy)
                for (int xx = x0; xx <= x1; ++xx) out[std::size_t(yy) * seg.width + xx] = 1;
        }
    return out;
}

}  // namespace

DepthMap inpaint_depth(const DepthMap& masked, const SegMask& seg, const InpaintOptions& opt) {
    if (masked.width != seg.width || masked.height != seg.height)
        throw ShapeMismatchError("depth and mask dimensions differ");
    if (masked.valid_count() == 0) throw EmptyBoundaryError("no valid pixel to diffuse from");

    const int w = masked.width, h = masked.height;
    const std::vector<std::uint8_t> grown = dilate(seg, opt.mask_dilation_px);

    // Fill set: the dilated mask plus invalid pixels inside it. Pixels that
    // are invalid for other reasons (out of fov, ray misses) stay untouched
    // and are excluded from every stencil.
    std::vector<std::uint8_t> fill(masked.valid.size(), 0);
    std::vector<std::size_t> fill_idx;
    for (std::size_t i = 0; i < fill.size(); ++i) {
        if (grown[i] || (seg.mask[i] && !masked.valid[i])) {
            fill[i] = 1;
            fill_idx.push_back(i);
        }
    }
    if (fill_idx.empty()) return masked;

    // Dirichlet values live in `u` wherever `known` is set; fill pixels get
    // the mean of the adjacent boundary as the initial guess.
    std::vector<double> u(masked.value.size(), 0.0);
    std::vector<std::uint8_t> known(masked.valid.size(), 0);
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (masked.valid[i] && !fill[i]) {
            u[i] = masked.value[i];
            known[i] = 1;
        }
    }
    double boundary_sum = 0.0;
    std::size_t boundary_n = 0;
    auto for_neighbors = [&](std::size_t i, auto&& fn) {
        const int x = int(i % w), y = int(i / w);
        if (x > 0) fn(i - 1);
        if (x + 1 < w) fn(i + 1);
        if (y > 0) fn(i - w);
        if (y + 1 < h) fn(i + w);
    };
    for (std::size_t i : fill_idx)
        for_neighbors(i, [&](std::size_t j) {
            if (known[j]) {
                boundary_sum += u[j];
                ++boundary_n;
            }
        });
    double init = 0.0;
    if (boundary_n > 0) {
        init = boundary_sum / double(boundary_n);
    } else {
        // Mask not adjacent to any valid pixel: fall back to the global mean.
        double s = 0.0;
        std::size_t n = 0;
        for (std::size_t i = 0; i < u.size(); ++i)
            if (known[i]) {
                s += u[i];
                ++n;
            }
        init = s / double(n);
    }
    for (std::size_t i : fill_idx) u[i] = init;

    // Red-black SOR on the 5-point Laplace stencil. Neighbors that are
    // neither known nor being filled are simply left out of the stencil.
    auto sweep = [&](int parity) {
        double max_delta = 0.0;
        for (std::size_t i : fill_idx) {
            const int x = int(i % w), y = int(i / w);
            if (((x + y) & 1) != parity) continue;
            double s = 0.0;
            int n = 0;
            for_neighbors(i, [&](std::size_t j) {
                if (known[j] || fill[j]) {
                    s += u[j];
                    ++n;
                }
            });
            if (n == 0) continue;
            const double target = s / n;
            const double delta = target - u[i];
            u[i] += opt.relaxation * delta;
            max_delta = std::max(max_delta, std::abs(delta));
        }
        return max_delta;
    };
    for (int it = 0; it < opt.max_sweeps; ++it) {
        const double r0 = sweep(0);
        const double r1 = sweep(1);
        if (std::max(r0, r1) < opt.tolerance) break;
    }

    DepthMap out = masked;
    for (std::size_t i : fill_idx) {
        out.value[i] = static_cast<float>(u[i]);
        out.valid[i] = 1;
    }
    return out;
}

namespace {

template <typename Fn>
void for_overlap(const DepthMap& a, const DepthMap& b, Fn&& fn) {
    if (a.width != b.width || a.height != b.height)
        throw ShapeMismatchError("depth map dimensions differ");
    for (std::size_t i = 0; i < a.value.size(); ++i)
        if (a.valid[i] && b.valid[i]) fn(i);
}

}  // namespace

double scene_loss(const DepthMap& pred, const DepthMap& gt) {
    double sum = 0.0;
    std::size_t n = 0;
    for_overlap(pred, gt, [&](std::size_t i) {
        const double d = double(pred.value[i]) - double(gt.value[i]);
        sum += d * d;
        ++n;
    });
    if (n == 0) throw NoOverlapError("no jointly-valid pixels");
    return sum / double(n);
}

double consistency_loss(const DepthMap& pred_scene, const DepthMap& pred_body,
                        const SegMask& seg) {
    if (pred_scene.width != seg.width || pred_scene.height != seg.height)
        throw ShapeMismatchError("depth and mask dimensions differ");
    double sum = 0.0;
    std::size_t n = 0;
    for_overlap(pred_scene, pred_body, [&](std::size_t i) {
        if (seg.mask[i]) return;
        const double d = double(pred_scene.value[i]) - double(pred_body.value[i]);
        sum += d * d;
        ++n;
    });
    if (n == 0) throw NoOverlapError("no valid background pixels");
    return sum / double(n);
}

double combined_depth_loss(const DepthMap& pred_scene, const DepthMap& gt_scene,
                           const DepthMap& pred_body, const SegMask& seg,
                           double lambda_scene, double lambda_consistency) {
    return lambda_scene * scene_loss(pred_scene, gt_scene) +
           lambda_consistency * consistency_loss(pred_scene, pred_body, seg);
}

DepthMetrics depth_metrics(const DepthMap& pred, const DepthMap& gt, const SegMask* restrict_to) {
    if (restrict_to && (restrict_to->width != gt.width || restrict_to->height != gt.height))
        throw ShapeMismatchError("restriction mask dimensions differ");
    double abs_rel_sum = 0.0, sq_sum = 0.0;
    std::size_t n = 0;
    for_overlap(pred, gt, [&](std::size_t i) {
        if (restrict_to && !restrict_to->mask[i]) return;
        const double g = gt.value[i];
        if (!(g > 0.0)) throw NonPositiveGtError("abs-rel needs positive ground truth depth");
        const double d = double(pred.value[i]) - g;
        abs_rel_sum += std::abs(d) / g;
        sq_sum += d * d;
        ++n;
    });
    if (n == 0) throw NoOverlapError("no jointly-valid pixels");
    return {abs_rel_sum / double(n), std::sqrt(sq_sum / double(n))};
}

// ---------------------------------------------------------------------------
// PGM interchange. P5, big-endian 16-bit samples per the format.

namespace {

void read_pgm_header(std::ifstream& in, const std::filesystem::path& path, int& w, int& h,
                     int& maxval) {
    std::string magic;
    in >> magic;
    if (magic != "P5") throw ParseError("not a binary PGM: " + path.string());
    auto next_int = [&](int& v) {
        // Skip whitespace and '#' comments.
        char c;
        while (in.get(c)) {
            if (c == '#') {
                std::string line;
                std::getline(in, line);
            } else if (!std::isspace(static_cast<unsigned char>(c))) {
                in.unget();
                break;
            }
        }
        if (!(in >> v)) throw ParseError("bad PGM header: " + path.string());
    };
    next_int(w);
    next_int(h);
    next_int(maxval);
    in.get();  // single whitespace before payload
    if (w <= 0 || h <= 0) throw ParseError("bad PGM size: " + path.string());
}

}  // namespace

void write_depth_pgm16(const std::filesystem::path& path, const DepthMap& depth) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << "P5\n" << depth.width << " " << depth.height << "\n65535\n";
    std::vector<std::uint8_t> row(static_cast<std::size_t>(depth.width) * 2);
    for (int y = 0; y < depth.height; ++y) {
        for (int x = 0; x < depth.width; ++x) {
            std::uint16_t mm = 0;
            if (depth.is_valid(x, y)) {
                const double v = std::round(double(depth.at(x, y)) * 1000.0);
                mm = static_cast<std::uint16_t>(std::clamp(v, 1.0, 65535.0));
            }
            row[std::size_t(x) * 2] = static_cast<std::uint8_t>(mm >> 8);
            row[std::size_t(x) * 2 + 1] = static_cast<std::uint8_t>(mm & 0xff);
        }
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size()));
    }
    if (!out) throw IoError("write failed for " + path.string());
}

DepthMap read_depth_pgm16(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    int w, h, maxval;
    read_pgm_header(in, path, w, h, maxval);
    if (maxval != 65535) throw ParseError("depth PGM must be 16-bit: " + path.string());
    DepthMap depth = DepthMap::invalid_map(w, h);
    std::vector<std::uint8_t> row(static_cast<std::size_t>(w) * 2);
    for (int y = 0; y < h; ++y) {
        in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()));
        if (!in) throw ParseError("truncated PGM payload: " + path.string());
        for (int x = 0; x < w; ++x) {
            const std::uint16_t mm =
                static_cast<std::uint16_t>((row[std::size_t(x) * 2] << 8) | row[std::size_t(x) * 2 + 1]);
            if (mm != 0) depth.set(x, y, float(mm) / 1000.0f);
        }
    }
    return depth;
}

void write_mask_pgm8(const std::filesystem::path& path, const SegMask& mask) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << "P5\n" << mask.width << " " << mask.height << "\n255\n";
    std::vector<std::uint8_t> row(static_cast<std::size_t>(mask.width));
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) row[std::size_t(x)] = mask.at(x, y) ? 255 : 0;
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size()));
    }
    if (!out) throw IoError("write failed for " + path.string());
}

SegMask read_mask_pgm8(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    int w, h, maxval;
    read_pgm_header(in, path, w, h, maxval);
    if (maxval != 255) throw ParseError("mask PGM must be 8-bit: " + path.string());
    SegMask mask = SegMask::zeros(w, h);
    std::vector<std::uint8_t> row(static_cast<std::size_t>(w));
    for (int y = 0; y < h; ++y) {
        in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()));
        if (!in) throw ParseError("truncated PGM payload: " + path.string());
        for (int x = 0; x < w; ++x) mask.set(x, y, row[std::size_t(x)] != 0);
    }
    return mask;
}

Tensor to_tensor(const DepthMap& depth) {
    // Invalid pixels encode as 0, which valid entries (> 0) never take.
    return make_tensor_f32(
        {static_cast<std::uint64_t>(depth.height), static_cast<std::uint64_t>(depth.width)},
        depth.value);
}

DepthMap depth_from_tensor(const Tensor& t) {
    if (t.dims.size() != 2) throw ShapeMismatchError("depth tensor must be H x W");
    DepthMap d = DepthMap::invalid_map(static_cast<int>(t.dims[1]), static_cast<int>(t.dims[0]));
    d.value = tensor_as_f32(t);
    for (std::size_t i = 0; i < d.value.size(); ++i) d.valid[i] = d.value[i] > 0.0f ? 1 : 0;
    return d;
}

}  // namespace egoscene
