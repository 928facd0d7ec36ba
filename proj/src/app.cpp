// Copyright Contributors to the EgoScene Project
// SPDX-License-Identifier: Apache-2.0

#include "egoscene/app.hpp"

#include <cstdio>
#include <fstream>

#include "egoscene/errors.hpp"
#include "egoscene/metrics.hpp"
#include "egoscene/tensor_io.hpp"

namespace egoscene::app {

RunConfig RunConfig::from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad config file: ") + e.what());
    }
    RunConfig cfg;
    cfg.apply_json(doc);
    return cfg;
}

void RunConfig::apply_json(const nlohmann::json& doc) {
    try {
        if (doc.contains("dataset")) dataset_manifest = doc.at("dataset").get<std::string>();
        if (doc.contains("output_dir")) output_dir = doc.at("output_dir").get<std::string>();
        if (doc.contains("calibration")) calibration_file = doc.at("calibration").get<std::string>();
        if (doc.contains("frames")) frames = doc.at("frames").get<int>();
        if (doc.contains("seed")) seed = doc.at("seed").get<std::uint64_t>();
        if (doc.contains("jitter")) jitter = doc.at("jitter").get<double>();
        if (doc.contains("voxel")) {
            const auto& v = doc.at("voxel");
            if (v.contains("side_length")) grid.side_length = v.at("side_length").get<double>();
            if (v.contains("resolution")) grid.resolution = v.at("resolution").get<int>();
            if (v.contains("epsilon")) grid.epsilon = v.at("epsilon").get<double>();
        }
        if (doc.contains("sigma")) sigma = doc.at("sigma").get<double>();
        if (doc.contains("beta")) beta = doc.at("beta").get<double>();
        if (doc.contains("inpaint")) inpaint = doc.at("inpaint").get<bool>();
        if (doc.contains("weights")) {
            const auto& w = doc.at("weights");
            if (w.contains("lambda_reproj")) weights.lambda_reproj = w.at("lambda_reproj").get<double>();
            if (w.contains("lambda_prior")) weights.lambda_prior = w.at("lambda_prior").get<double>();
            if (w.contains("lambda_contact"))
                weights.lambda_contact = w.at("lambda_contact").get<double>();
            if (w.contains("epsilon")) weights.epsilon = w.at("epsilon").get<double>();
        }
        if (doc.contains("max_iters")) max_iters = doc.at("max_iters").get<int>();
        if (doc.contains("room")) {
            const auto& r = doc.at("room");
            if (r.contains("walls")) room.walls = r.at("walls").get<bool>();
            if (r.contains("half_extent")) room.half_extent = r.at("half_extent").get<double>();
            if (r.contains("wall_height")) room.wall_height = r.at("wall_height").get<double>();
            if (r.contains("ceiling")) room.ceiling = r.at("ceiling").get<bool>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad config document: ") + e.what());
    }
}

nlohmann::json RunReport::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    double mpjpe_sum = 0, pa_sum = 0, ba_sum = 0, abs_rel_sum = 0, rmse_sum = 0;
    double abs_rel_body_sum = 0, rmse_body_sum = 0;
    int contact_n = 0, pen_free_n = 0, ok_n = 0;
    for (const FrameReport& f : frames) {
        nlohmann::json j;
        j["id"] = f.id;
        j["kind"] = f.kind;
        j["ok"] = f.ok;
        if (!f.ok) {
            j["error"] = f.error;
            arr.push_back(j);
            continue;
        }
        j["mpjpe_mm"] = f.mpjpe_mm;
        j["pa_mpjpe_mm"] = f.pa_mpjpe_mm;
        j["ba_mpjpe_mm"] = f.ba_mpjpe_mm;
        j["contact"] = f.contact;
        j["penetration_free"] = f.penetration_free;
        j["abs_rel"] = f.abs_rel;
        j["rmse_m"] = f.rmse_m;
        j["abs_rel_body"] = f.abs_rel_body;
        j["rmse_body_m"] = f.rmse_body_m;
        j["occupied_voxels"] = f.occupied_voxels;
        arr.push_back(j);
        mpjpe_sum += f.mpjpe_mm;
        pa_sum += f.pa_mpjpe_mm;
        ba_sum += f.ba_mpjpe_mm;
        abs_rel_sum += f.abs_rel;
        rmse_sum += f.rmse_m;
        abs_rel_body_sum += f.abs_rel_body;
        rmse_body_sum += f.rmse_body_m;
        contact_n += f.contact;
        pen_free_n += f.penetration_free;
        ++ok_n;
    }
    nlohmann::json doc;
    doc["frames"] = arr;
    doc["failed_frames"] = failed_frames;
    if (ok_n > 0) {
        doc["aggregate"] = {{"frames", ok_n},
                            {"mpjpe_mm", mpjpe_sum / ok_n},
                            {"pa_mpjpe_mm", pa_sum / ok_n},
                            {"ba_mpjpe_mm", ba_sum / ok_n},
                            {"contact_rate", double(contact_n) / ok_n},
                            {"penetration_free_rate", double(pen_free_n) / ok_n},
                            {"abs_rel", abs_rel_sum / ok_n},
                            {"rmse_m", rmse_sum / ok_n},
                            {"abs_rel_body", abs_rel_body_sum / ok_n},
                            {"rmse_body_m", rmse_body_sum / ok_n}};
    }
    return doc;
}

void RunReport::save_json(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << to_json().dump(2) << "\n";
}

void RunReport::save_csv(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "id,kind,mpjpe_mm,pa_mpjpe_mm,ba_mpjpe_mm,contact,penetration_free,"
           "abs_rel,rmse_m,abs_rel_body,rmse_body_m,occupied_voxels\n";
    char line[320];
    for (const FrameReport& f : frames) {
        if (!f.ok) continue;
        std::snprintf(line, sizeof(line), "%d,%s,%.6f,%.6f,%.6f,%d,%d,%.6f,%.6f,%.6f,%.6f,%zu\n",
                      f.id, f.kind.c_str(), f.mpjpe_mm, f.pa_mpjpe_mm, f.ba_mpjpe_mm, f.contact,
                      f.penetration_free, f.abs_rel, f.rmse_m, f.abs_rel_body, f.rmse_body_m,
                      f.occupied_voxels);
        out << line;
    }
}

std::filesystem::path cmd_generate(const RunConfig& config) {
    DatasetSpec spec;
    spec.room = config.room;
    spec.seed = config.seed;
    spec.jitter = config.jitter;
    if (!config.calibration_file.empty())
        spec.calibration = FisheyeModel::load(config.calibration_file);
    generate_dataset(spec, config.frames, config.output_dir);
    return config.output_dir / "manifest.json";
}

RunReport evaluate_manifest(const RunConfig& config, const Manifest& manifest,
                            const std::filesystem::path& dataset_dir) {
    const FisheyeModel model = FisheyeModel::load(dataset_dir / manifest.calibration);
    RunReport report;

    for (const FrameRecord& rec : manifest.frames) {
        FrameReport fr;
        fr.id = rec.id;
        fr.kind = rec.kind;
        try {
            const DepthMap depth_body =
                depth_from_tensor(load_tensor(dataset_dir / rec.depth_body));
            const DepthMap depth_scene_gt =
                depth_from_tensor(load_tensor(dataset_dir / rec.depth_scene));
            const SegMask mask = read_mask_pgm8(dataset_dir / rec.seg_mask);
            const Pose gt = Pose::load(dataset_dir / rec.pose);

            // Scene depth estimate: masked + harmonically inpainted, or the
            // raw body depth when inpainting is disabled.
            DepthMap depth_est;
            if (config.inpaint) {
                depth_est = inpaint_depth(mask_depth(depth_body, mask), mask);
            } else {
                depth_est = depth_body;
            }

            PipelineConfig pc{config.grid, config.sigma, config.beta};
            PipelineInputs inputs;
            inputs.oracle_pose = &gt;
            inputs.scene_depth = &depth_est;
            const PipelineResult result = run_pipeline(model, inputs, pc);

            fr.mpjpe_mm = mpjpe(result.pose, gt);
            fr.pa_mpjpe_mm = pa_mpjpe(result.pose, gt);
            fr.ba_mpjpe_mm = ba_mpjpe(result.pose, gt, skeleton::bone_template());
            fr.occupied_voxels = result.diagnostics.occupied_voxels;

            const PointCloud scene_cloud = depth_to_pointcloud(model, depth_scene_gt);
            fr.contact = contact_rate({result.pose}, scene_cloud) > 0.5 ? 1 : 0;
            fr.penetration_free =
                penetration_free_rate({result.pose}, depth_scene_gt, model).fraction > 0.5 ? 1 : 0;

            const DepthMetrics dm = depth_metrics(depth_est, depth_scene_gt);
            fr.abs_rel = dm.abs_rel;
            fr.rmse_m = dm.rmse;
            const DepthMetrics dmb = depth_metrics(depth_est, depth_scene_gt, &mask);
            fr.abs_rel_body = dmb.abs_rel;
            fr.rmse_body_m = dmb.rmse;

            if (config.save_pgm_previews) {
                char name[64];
                std::snprintf(name, sizeof(name), "frame_%04d", rec.id);
                write_depth_pgm16(config.output_dir / (std::string(name) + "_masked.pgm"),
                                  mask_depth(depth_body, mask));
                write_depth_pgm16(config.output_dir / (std::string(name) + "_inpainted.pgm"),
                                  depth_est);
            }
        } catch (const std::exception& e) {
            fr.ok = false;
            fr.error = e.what();
            ++report.failed_frames;
        }
        report.frames.push_back(fr);
    }
    return report;
}

std::filesystem::path cmd_run(const RunConfig& config) {
    const Manifest manifest = Manifest::load(config.dataset_manifest);
    const auto dataset_dir = config.dataset_manifest.parent_path();
    std::filesystem::create_directories(config.output_dir);
    const RunReport report = evaluate_manifest(config, manifest, dataset_dir);
    report.save_json(config.output_dir / "report.json");
    report.save_csv(config.output_dir / "report.csv");
    return config.output_dir / "report.json";
}

std::filesystem::path cmd_inpaint(const RunConfig& config,
                                  const std::filesystem::path& depth_file,
                                  const std::filesystem::path& mask_file) {
    const DepthMap depth = depth_file.extension() == ".pgm"
                               ? read_depth_pgm16(depth_file)
                               : depth_from_tensor(load_tensor(depth_file));
    const SegMask mask = read_mask_pgm8(mask_file);
    const DepthMap filled = inpaint_depth(mask_depth(depth, mask), mask);
    std::filesystem::create_directories(config.output_dir);
    const auto out = config.output_dir / "inpainted.vol";
    save_tensor(out, to_tensor(filled));
    write_depth_pgm16(config.output_dir / "inpainted.pgm", filled);
    return out;
}

std::filesystem::path cmd_optimize(const RunConfig& config) {
    const Pose init = Pose::load(config.init_pose_file);
    const Keypoints2D detections = Keypoints2D::load(config.detections_file);
    const PointCloud cloud = read_ply(config.cloud_file);
    const FisheyeModel model = config.calibration_file.empty()
                                   ? default_test_camera()
                                   : FisheyeModel::load(config.calibration_file);
    const OptimizationTrace trace =
        optimize_pose(init, detections, cloud, model, config.weights, config.max_iters);
    std::filesystem::create_directories(config.output_dir);
    trace.save_csv(config.output_dir / "trace.csv");
    trace.final_pose.save(config.output_dir / "final_pose.json");
    return config.output_dir / "trace.csv";
}

std::filesystem::path cmd_eval(const RunConfig& config, const std::filesystem::path& pred_dir) {
    const Manifest manifest = Manifest::load(config.dataset_manifest);
    const auto dataset_dir = config.dataset_manifest.parent_path();
    const FisheyeModel model = FisheyeModel::load(dataset_dir / manifest.calibration);

    RunReport report;
    for (const FrameRecord& rec : manifest.frames) {
        FrameReport fr;
        fr.id = rec.id;
        fr.kind = rec.kind;
        try {
            char name[64];
            std::snprintf(name, sizeof(name), "pred_%04d_pose.json", rec.id);
            const Pose pred = Pose::load(pred_dir / name);
            const Pose gt = Pose::load(dataset_dir / rec.pose);
            const DepthMap depth_scene_gt =
                depth_from_tensor(load_tensor(dataset_dir / rec.depth_scene));

            fr.mpjpe_mm = mpjpe(pred, gt);
            fr.pa_mpjpe_mm = pa_mpjpe(pred, gt);
            fr.ba_mpjpe_mm = ba_mpjpe(pred, gt, skeleton::bone_template());
            const PointCloud scene_cloud = depth_to_pointcloud(model, depth_scene_gt);
            fr.contact = contact_rate({pred}, scene_cloud) > 0.5 ? 1 : 0;
            fr.penetration_free =
                penetration_free_rate({pred}, depth_scene_gt, model).fraction > 0.5 ? 1 : 0;
        } catch (const std::exception& e) {
            fr.ok = false;
            fr.error = e.what();
            ++report.failed_frames;
        }
        report.frames.push_back(fr);
    }
    std::filesystem::create_directories(config.output_dir);
    report.save_json(config.output_dir / "eval_report.json");
    report.save_csv(config.output_dir / "eval_report.csv");
    return config.output_dir / "eval_report.json";
}

}  // namespace egoscene::app
