// Copyright Contributors to the EgoScene Project
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "egoscene/app.hpp"
#include "egoscene/errors.hpp"

namespace {

int log_level() {
    // EGOSCENE_LOG=quiet|info|debug; log level is the only env knob.
    const char* v = std::getenv("EGOSCENE_LOG");
    if (!v) return 1;
    const std::string s(v);
    if (s == "quiet") return 0;
    if (s == "debug") return 2;
    return 1;
}

void info(const std::string& msg) {
    if (log_level() >= 1) std::cerr << "[egoscene] " << msg << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    egoscene::app::RunConfig cfg;

    // The config file seeds the defaults; flags parsed afterwards override it.
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--config") {
            try {
                cfg = egoscene::app::RunConfig::from_json_file(argv[i + 1]);
            } catch (const std::exception& e) {
                std::cerr << "error: " << e.what() << "\n";
                return 1;
            }
        }
    }

    CLI::App cli{"Egocentric scene-aware pose estimation toolkit"};
    cli.require_subcommand(1);
    std::string config_file;
    cli.add_option("--config", config_file, "JSON config file; flags override its values");

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--out", cfg.output_dir, "output directory");
        cmd->add_option("--calib", cfg.calibration_file, "camera calibration JSON");
    };

    auto* generate = cli.add_subcommand("generate", "render a synthetic dataset");
    add_common(generate);
    generate->add_option("--frames", cfg.frames, "number of frames");
    generate->add_option("--seed", cfg.seed, "dataset seed");
    generate->add_option("--jitter", cfg.jitter, "pose randomization scale");

    auto* run = cli.add_subcommand("run", "inpaint, run the pipeline and evaluate a dataset");
    add_common(run);
    run->add_option("--dataset", cfg.dataset_manifest, "manifest.json of a generated dataset")
        ->required();
    run->add_option("--resolution", cfg.grid.resolution, "voxels per side");
    run->add_option("--side", cfg.grid.side_length, "volume side length, meters");
    run->add_option("--epsilon", cfg.grid.epsilon, "occupancy threshold, meters");
    run->add_option("--sigma", cfg.sigma, "heatmap oracle scale, meters");
    run->add_option("--beta", cfg.beta, "soft-argmax temperature");
    run->add_flag("--previews", cfg.save_pgm_previews, "write PGM depth previews");
    bool no_inpaint = false;
    run->add_flag("--no-inpaint", no_inpaint, "feed the body depth through unfilled");

    auto* inpaint = cli.add_subcommand("inpaint", "fill one masked depth map");
    add_common(inpaint);
    std::string depth_file, mask_file;
    inpaint->add_option("--depth", depth_file, "depth map (.vol or 16-bit .pgm)")->required();
    inpaint->add_option("--mask", mask_file, "body mask (8-bit .pgm)")->required();

    auto* optimize = cli.add_subcommand("optimize", "scene-constrained pose refinement");
    add_common(optimize);
    optimize->add_option("--init", cfg.init_pose_file, "initial pose JSON")->required();
    optimize->add_option("--detections", cfg.detections_file, "2D detections JSON")->required();
    optimize->add_option("--cloud", cfg.cloud_file, "scene point cloud PLY")->required();
    optimize->add_option("--max-iters", cfg.max_iters, "iteration budget");
    optimize->add_option("--lambda-reproj", cfg.weights.lambda_reproj, "reprojection weight");
    optimize->add_option("--lambda-prior", cfg.weights.lambda_prior, "anchor weight");
    optimize->add_option("--lambda-contact", cfg.weights.lambda_contact, "contact weight");
    optimize->add_option("--margin", cfg.weights.epsilon, "contact margin, meters");

    auto* eval = cli.add_subcommand("eval", "evaluate externally predicted poses");
    add_common(eval);
    eval->add_option("--dataset", cfg.dataset_manifest, "manifest.json")->required();
    std::string pred_dir;
    eval->add_option("--pred", pred_dir, "directory with pred_%04d_pose.json files")->required();

    CLI11_PARSE(cli, argc, argv);

    try {
        if (no_inpaint) cfg.inpaint = false;

        if (generate->parsed()) {
            const auto manifest = egoscene::app::cmd_generate(cfg);
            info("dataset written");
            std::cout << manifest.string() << "\n";
        } else if (run->parsed()) {
            const auto report = egoscene::app::cmd_run(cfg);
            info("evaluation complete");
            std::cout << report.string() << "\n";
        } else if (inpaint->parsed()) {
            const auto out = egoscene::app::cmd_inpaint(cfg, depth_file, mask_file);
            std::cout << out.string() << "\n";
        } else if (optimize->parsed()) {
            const auto trace = egoscene::app::cmd_optimize(cfg);
            info("optimization complete");
            std::cout << trace.string() << "\n";
        } else if (eval->parsed()) {
            const auto report = egoscene::app::cmd_eval(cfg, pred_dir);
            std::cout << report.string() << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
