// Copyright Contributors to the EgoScene Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "egoscene/contact_optimizer.hpp"
#include "egoscene/pipeline.hpp"
#include "egoscene/synthetic_scene.hpp"

namespace egoscene::app {

/// Everything the subcommands need; flags and the optional JSON config file
/// both land here.
struct RunConfig {
    // paths
    std::filesystem::path dataset_manifest;
    std::filesystem::path output_dir = "out";
    std::filesystem::path calibration_file;  // empty: dataset's / default camera

    // generate
    int frames = 10;
    std::uint64_t seed = 7;
    double jitter = 1.0;
    RoomSpec room;

    // pipeline
    VoxelGridParams grid;
    double sigma = 0.05;
    double beta = 200.0;
    bool inpaint = true;

    // optimize
    EnergyWeights weights;
    int max_iters = 200;
    std::filesystem::path init_pose_file;
    std::filesystem::path detections_file;
    std::filesystem::path cloud_file;

    // run --output extras
    bool save_pgm_previews = false;

    static RunConfig from_json_file(const std::filesystem::path& path);
    void apply_json(const nlohmann::json& doc);
};

/// Per-frame evaluation row of the `run`/`eval` reports.
struct FrameReport {
    int id = 0;
    std::string kind;
    bool ok = true;
    std::string error;
    double mpjpe_mm = 0.0, pa_mpjpe_mm = 0.0, ba_mpjpe_mm = 0.0;
    int contact = 0;            // predicted pose touches the scene cloud
    int penetration_free = 0;
    double abs_rel = 0.0, rmse_m = 0.0;          // estimated scene depth vs gt
    double abs_rel_body = 0.0, rmse_body_m = 0.0;  // restricted to the body mask
    std::size_t occupied_voxels = 0;
};

struct RunReport {
    std::vector<FrameReport> frames;
    int failed_frames = 0;

    nlohmann::json to_json() const;
    void save_json(const std::filesystem::path& path) const;
    void save_csv(const std::filesystem::path& path) const;
};

/// generate: render a synthetic dataset; returns the manifest path.
std::filesystem::path cmd_generate(const RunConfig& config);

/// run: inpaint, run the oracle pipeline and evaluate every frame of the
/// manifest; returns the JSON report path (CSV lands next to it).
std::filesystem::path cmd_run(const RunConfig& config);

/// inpaint: fill one masked depth map; returns the output path.
std::filesystem::path cmd_inpaint(const RunConfig& config,
                                  const std::filesystem::path& depth_file,
                                  const std::filesystem::path& mask_file);

/// optimize: refine a pose against detections and a scene cloud; writes the
/// trace CSV and the final pose, returns the trace path.
std::filesystem::path cmd_optimize(const RunConfig& config);

/// eval: compare externally predicted poses (out_dir naming convention
/// pred_%04d_pose.json inside pred_dir) against the manifest ground truth.
std::filesystem::path cmd_eval(const RunConfig& config, const std::filesystem::path& pred_dir);

/// Core of cmd_run, reusable without touching the filesystem layout.
RunReport evaluate_manifest(const RunConfig& config, const Manifest& manifest,
                            const std::filesystem::path& dataset_dir);

}  // namespace egoscene::app
