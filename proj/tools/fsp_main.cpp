// Roadside LiDAR freight-detection pipeline CLI: frame replay and detection,
// background construction, GPS calibration, FSP-oriented evaluation, profiling
// and synthetic scene generation.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "fsp/background.hpp"
#include "fsp/config.hpp"
#include "fsp/evaluation.hpp"
#include "fsp/frame_io.hpp"
#include "fsp/pipeline.hpp"
#include "fsp/registration.hpp"
#include "fsp/synth.hpp"

namespace {

using nlohmann::ordered_json;

fsp::GeodeticCoord parse_lat_lon_alt(const std::string& s) {
    double lat = 0, lon = 0, alt = 0;
    if (std::sscanf(s.c_str(), "%lf,%lf,%lf", &lat, &lon, &alt) != 3) {
        throw fsp::InvalidParameterError("expected lat,lon,alt but got '" + s + "'");
    }
    return {lat, lon, alt};
}

fsp::MatchThresholds parse_thresholds(const std::string& s) {
    fsp::MatchThresholds th;
    if (s.empty()) return th;
    if (std::sscanf(s.c_str(), "long=%lf,compact=%lf", &th.long_truck_m, &th.compact_truck_m) !=
        2) {
        throw fsp::InvalidParameterError("expected long=<m>,compact=<m> but got '" + s + "'");
    }
    return th;
}

std::int64_t frame_id_from_filename(const std::string& name) {
    // Trailing integer of the stem, e.g. frame_000017.txt -> 17.
    const std::string stem = std::filesystem::path(name).stem().string();
    std::size_t end = stem.size();
    while (end > 0 && std::isdigit(static_cast<unsigned char>(stem[end - 1]))) --end;
    if (end == stem.size()) {
        throw fsp::IoError("cannot derive frame_id from file name '" + name + "'");
    }
    return std::stoll(stem.substr(end));
}

int run_detect(const std::string& config_path, const std::string& frames_dir,
               const std::string& background_path, const std::string& extrinsic_path,
               const std::string& out_path, const std::string& requests_path,
               const std::string& timing_path) {
    fsp::PipelineConfig config = fsp::load_config(config_path);
    fsp::BackgroundMap background = fsp::load_background(background_path);

    std::optional<fsp::CalibrationArtifact> extrinsic;
    if (!extrinsic_path.empty()) {
        extrinsic = fsp::load_calibration(extrinsic_path);
    } else if (config.extrinsic_path) {
        extrinsic = fsp::load_calibration(*config.extrinsic_path);
    }

    std::ofstream records_out(out_path);
    if (!records_out) throw fsp::IoError("cannot write " + out_path);
    std::ofstream requests_out;
    if (!requests_path.empty()) {
        requests_out.open(requests_path);
        if (!requests_out) throw fsp::IoError("cannot write " + requests_path);
    }
    std::ofstream timing_out;
    if (!timing_path.empty()) {
        timing_out.open(timing_path);
        if (!timing_out) throw fsp::IoError("cannot write " + timing_path);
        timing_out << "frame_id,foreground_points,processing_seconds\n";
    }

    fsp::ReplaySinks sinks;
    sinks.on_record = [&](const fsp::DetectionRecord& r) {
        records_out << fsp::record_to_jsonl(r) << "\n";
    };
    if (requests_out.is_open()) {
        sinks.on_request = [&](const fsp::FSPRequestMessage& m) {
            requests_out << fsp::request_to_jsonl(m) << "\n";
        };
    }
    if (timing_out.is_open()) {
        sinks.on_timing = [&](const fsp::TimingSample& t) {
            char line[96];
            std::snprintf(line, sizeof(line), "%lld,%lld,%.9f\n",
                          static_cast<long long>(t.frame_id),
                          static_cast<long long>(t.foreground_point_count), t.processing_seconds);
            timing_out << line;
        };
    }
    sinks.on_warning = [](const std::string& w) { std::cerr << "warning: " << w << "\n"; };

    const fsp::ReplaySummary summary =
        fsp::replay_directory(config, frames_dir, std::move(background), std::move(extrinsic), sinks);
    std::cout << "frames_processed=" << summary.frames_processed
              << " frames_skipped=" << summary.frames_skipped
              << " records=" << summary.records_emitted
              << " requests=" << summary.requests_emitted << "\n";
    return 0;
}

int run_build_background(const std::string& config_path, const std::string& frames_dir,
                         const std::string& out_path) {
    const fsp::PipelineConfig config = fsp::load_config(config_path);
    const fsp::RotationMatrix3 rotation = fsp::build_rotation(config.tilt);

    std::vector<fsp::PointCloudFrame> frames;
    for (const std::string& path : fsp::list_frame_files(frames_dir)) {
        const fsp::PointCloudFrame raw = fsp::read_frame_file(path);
        frames.push_back(fsp::crop_roi(fsp::correct_frame(raw, rotation), config.roi));
    }
    const fsp::BackgroundMap map = fsp::BackgroundMap::build(frames, config.background.dedup_voxel);
    fsp::save_background(map, out_path);
    std::cout << "background points=" << map.size() << " from " << frames.size() << " frames\n";
    return 0;
}

int run_calibrate_static(const std::string& pairs_path, const std::string& enu_origin,
                         const std::string& out_path) {
    const fsp::EnuReference ref{parse_lat_lon_alt(enu_origin)};
    const auto raw = fsp::read_correspondence_csv(pairs_path);
    fsp::CorrespondenceSet set;
    for (const auto& rc : raw) {
        set.pairs.push_back({rc.lidar, fsp::geodetic_to_enu(rc.geodetic, ref)});
    }
    const fsp::StaticRegistrationResult result = fsp::estimate_static_extrinsic(set);
    if (result.near_collinear) {
        std::cerr << "warning: correspondence geometry is near-collinear (ratio "
                  << result.collinearity_ratio << "); expect a weakly constrained rotation\n";
    }

    fsp::CalibrationArtifact artifact;
    artifact.enu_reference = ref;
    artifact.transform = result.transform;
    artifact.static_error_mean = result.residuals.mean;
    artifact.static_error_max = result.residuals.max;
    fsp::save_calibration(artifact, out_path);
    std::printf("static registration: n=%zu mean=%.4f m max=%.4f m\n", set.pairs.size(),
                result.residuals.mean, result.residuals.max);
    return 0;
}

int run_calibrate_trajectory(const std::string& extrinsic_path,
                             const std::vector<std::string>& lidar_paths,
                             const std::vector<std::string>& gps_paths, double spacing,
                             const std::string& out_path, const std::string& report_path) {
    if (lidar_paths.size() != gps_paths.size() || lidar_paths.empty()) {
        throw fsp::InvalidParameterError(
            "need the same nonzero number of --lidar-traj and --gps-traj files");
    }
    fsp::CalibrationArtifact artifact = fsp::load_calibration(extrinsic_path);

    std::vector<fsp::TrajectoryPair> pairs;
    for (std::size_t i = 0; i < lidar_paths.size(); ++i) {
        std::vector<fsp::Point3> lidar_enu;
        for (const auto& [ts, p] : fsp::read_lidar_trajectory_csv(lidar_paths[i])) {
            lidar_enu.push_back(fsp::to_point(fsp::apply_extrinsic(artifact.transform, p)));
        }
        std::vector<fsp::Point3> gps_enu;
        for (const auto& [ts, g] : fsp::read_gps_trajectory_csv(gps_paths[i])) {
            gps_enu.push_back(fsp::to_point(fsp::geodetic_to_enu(g, artifact.enu_reference)));
        }
        pairs.push_back({fsp::resample_by_arclength(lidar_enu, spacing),
                         fsp::resample_by_arclength(gps_enu, spacing)});
    }

    const fsp::PlanarRefinement refine = fsp::refine_planar_and_vertical(pairs);

    // Pre/post horizontal errors stacked over all trajectories.
    std::vector<double> pre_errors, post_errors;
    ordered_json per_trajectory = ordered_json::array();
    const Eigen::Matrix3d rz = fsp::yaw_rotation(refine.theta_yaw);
    for (const fsp::TrajectoryPair& tp : pairs) {
        const fsp::ErrorReport pre = fsp::trajectory_alignment_error(tp.lidar_enu, tp.gps_enu);
        std::vector<fsp::TrajectorySample> refined = tp.lidar_enu;
        for (fsp::TrajectorySample& s : refined) {
            const Eigen::Vector3d v =
                rz * Eigen::Vector3d(s.position.x, s.position.y, s.position.z) +
                Eigen::Vector3d(refine.t_xy.x(), refine.t_xy.y(), refine.delta_z);
            s.position = {v.x(), v.y(), v.z()};
        }
        const fsp::ErrorReport post = fsp::trajectory_alignment_error(refined, tp.gps_enu);
        pre_errors.insert(pre_errors.end(), pre.per_point.begin(), pre.per_point.end());
        post_errors.insert(post_errors.end(), post.per_point.begin(), post.per_point.end());
        per_trajectory.push_back({{"samples", pre.per_point.size()},
                                  {"pre", {{"mean", pre.mean}, {"max", pre.max}}},
                                  {"post", {{"mean", post.mean}, {"max", post.max}}}});
    }
    auto summarize = [](const std::vector<double>& e) {
        double mean = 0, mx = 0;
        for (double v : e) {
            mean += v;
            mx = std::max(mx, v);
        }
        if (!e.empty()) mean /= static_cast<double>(e.size());
        return std::pair<double, double>(mean, mx);
    };
    const auto [pre_mean, pre_max] = summarize(pre_errors);
    const auto [post_mean, post_max] = summarize(post_errors);

    artifact.transform = fsp::compose_final(artifact.transform, refine);
    artifact.trajectory_error_mean = post_mean;
    artifact.trajectory_error_max = post_max;
    artifact.created_at.clear();  // refresh on save
    fsp::save_calibration(artifact, out_path);

    if (!report_path.empty()) {
        ordered_json report;
        report["spacing_m"] = spacing;
        report["trajectories"] = lidar_paths.size();
        report["refinement"] = {{"theta_yaw_rad", refine.theta_yaw},
                                {"t_xy", {refine.t_xy.x(), refine.t_xy.y()}},
                                {"delta_z", refine.delta_z}};
        report["pre_refinement"] = {{"mean", pre_mean}, {"max", pre_max}};
        report["post_refinement"] = {{"mean", post_mean}, {"max", post_max}};
        report["per_trajectory"] = per_trajectory;
        fsp::write_text_file(report_path, report.dump(2) + "\n");
    }
    std::printf("trajectory alignment: pre mean=%.4f max=%.4f | post mean=%.4f max=%.4f\n",
                pre_mean, pre_max, post_mean, post_max);
    return 0;
}

int run_eval_fsp(const std::string& annotations_path, const std::string& records_path,
                 const std::string& thresholds_str, const std::string& out_path) {
    const fsp::MatchThresholds thresholds = parse_thresholds(thresholds_str);

    // Group predictions by frame.
    std::unordered_map<std::int64_t, std::vector<fsp::LabeledDetection>> by_frame;
    {
        std::ifstream in(records_path);
        if (!in) throw fsp::IoError("cannot open " + records_path);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const fsp::DetectionRecord r = fsp::record_from_jsonl(line);
            by_frame[r.frame_id].push_back({r.vehicle_class, r.position_lidar});
        }
    }

    std::ifstream ann_in(annotations_path);
    if (!ann_in) throw fsp::IoError("cannot open " + annotations_path);
    fsp::ConfusionCounts counts;
    ordered_json scenarios = ordered_json::array();
    std::string line;
    while (std::getline(ann_in, line)) {
        if (line.empty()) continue;
        fsp::ScenarioAnnotation ann;
        fsp::MatchThresholds line_thresholds = thresholds;
        try {
            const auto j = nlohmann::json::parse(line);
            ann.scenario_id = j.at("scenario_id").get<std::string>();
            ann.frame_file = j.at("frame_file").get<std::string>();
            if (j.contains("frame_id")) ann.frame_id = j.at("frame_id").get<std::int64_t>();
            ann.gt_class = fsp::vehicle_class_from_string(j.at("gt_class").get<std::string>());
            const auto& p = j.at("gt_position");
            ann.gt_position = {p.at(0).get<double>(), p.at(1).get<double>(),
                               p.at(2).get<double>()};
            if (j.contains("note")) ann.note = j.at("note").get<std::string>();
            // Optional per-scenario override for sensitivity studies.
            if (j.contains("thresholds")) {
                const auto& th = j.at("thresholds");
                line_thresholds.long_truck_m = th.value("long", thresholds.long_truck_m);
                line_thresholds.compact_truck_m = th.value("compact", thresholds.compact_truck_m);
            }
        } catch (const nlohmann::json::exception& e) {
            throw fsp::IoError(std::string("invalid annotation line: ") + e.what());
        }
        const std::int64_t frame_id =
            ann.frame_id ? *ann.frame_id : frame_id_from_filename(ann.frame_file);
        static const std::vector<fsp::LabeledDetection> kNone;
        const auto it = by_frame.find(frame_id);
        const auto outcome =
            fsp::match_frame(ann, it == by_frame.end() ? kNone : it->second, line_thresholds);
        counts.add(outcome);
        scenarios.push_back({{"scenario_id", ann.scenario_id},
                             {"frame_id", frame_id},
                             {"gt_class", fsp::to_string(ann.gt_class)},
                             {"outcome", fsp::to_string(outcome)}});
    }

    const fsp::MetricsReport metrics = fsp::compute_metrics(counts);
    ordered_json report;
    report["thresholds"] = {{"long_truck_m", thresholds.long_truck_m},
                            {"compact_truck_m", thresholds.compact_truck_m}};
    report["counts"] = {{"tp", counts.tp}, {"fp", counts.fp}, {"fn", counts.fn}, {"tn", counts.tn}};
    report["precision"] = metrics.precision ? ordered_json(*metrics.precision) : ordered_json(nullptr);
    report["recall"] = metrics.recall ? ordered_json(*metrics.recall) : ordered_json(nullptr);
    report["f1"] = metrics.f1 ? ordered_json(*metrics.f1) : ordered_json(nullptr);
    report["scenarios"] = scenarios;
    fsp::write_text_file(out_path, report.dump(2) + "\n");

    auto cell = [](const std::optional<double>& v) {
        char buf[16];
        if (!v) return std::string("n/a");
        std::snprintf(buf, sizeof(buf), "%.2f", *v);
        return std::string(buf);
    };
    std::printf("%-10s %-7s %-8s\n", "Precision", "Recall", "F1 Score");
    std::printf("%-10s %-7s %-8s\n", cell(metrics.precision).c_str(), cell(metrics.recall).c_str(),
                cell(metrics.f1).c_str());
    std::printf("TP=%d FP=%d FN=%d TN=%d (n=%d)\n", counts.tp, counts.fp, counts.fn, counts.tn,
                counts.total());
    return 0;
}

int run_profile(const std::string& timing_path, double budget, const std::string& out_path) {
    const std::vector<fsp::TimingSample> samples = fsp::read_timing_csv(timing_path);
    const fsp::ProfileReport report = fsp::profile_report(samples, budget);

    ordered_json j;
    j["samples"] = report.sample_count;
    j["budget_seconds"] = report.budget_seconds;
    j["mean_seconds"] = report.mean_seconds;
    j["max_seconds"] = report.max_seconds;
    j["p99_seconds"] = report.p99_seconds;
    j["over_budget_fraction"] = report.over_budget_fraction;
    j["count_time_correlation"] = report.count_time_correlation
                                      ? ordered_json(*report.count_time_correlation)
                                      : ordered_json(nullptr);
    fsp::write_text_file(out_path, j.dump(2) + "\n");
    std::printf("frames=%zu mean=%.4fs max=%.4fs p99=%.4fs over_budget=%.1f%%\n",
                report.sample_count, report.mean_seconds, report.max_seconds, report.p99_seconds,
                100.0 * report.over_budget_fraction);
    if (report.count_time_correlation) {
        std::printf("corr(foreground_points, time)=%.3f\n", *report.count_time_correlation);
    }
    return 0;
}

int run_synth(const std::string& params_path, const std::string& out_dir) {
    const fsp::SynthSceneParams params =
        fsp::synth_params_from_json_text(fsp::read_text_file(params_path));
    const fsp::SynthSceneOutput out = fsp::synth_scene(params, out_dir);
    std::cout << "frames: " << out.frames_dir << "\nbackground: " << out.background_dir
              << "\nground truth: " << out.ground_truth_path << "\n";
    return 0;
}

int run_forward(const std::string& in_path, const std::string& out_path, bool follow,
                double max_seconds) {
    std::ifstream in(in_path);
    if (!in) throw fsp::IoError("cannot open " + in_path);
    std::ofstream out(out_path, std::ios::app);
    if (!out) throw fsp::IoError("cannot write " + out_path);

    const auto start = std::chrono::steady_clock::now();
    std::size_t forwarded = 0, dropped = 0;
    std::string line;
    while (true) {
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            if (!nlohmann::json::accept(line)) {
                ++dropped;
                std::cerr << "warning: dropping malformed record line\n";
                continue;
            }
            out << line << "\n";
            ++forwarded;
        }
        if (!follow) break;
        if (std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() >
            max_seconds) {
            break;
        }
        out.flush();
        in.clear();  // keep tailing the growing file
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
    std::cout << "forwarded=" << forwarded << " dropped=" << dropped << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Roadside LiDAR freight detection pipeline"};
    app.require_subcommand(1);

    std::string config_path, frames_dir, background_path, extrinsic_path, out_path;
    std::string requests_path, timing_path;

    auto* detect = app.add_subcommand("detect", "Replay frames through the detection pipeline");
    detect->add_option("--config", config_path)->required();
    detect->add_option("--frames", frames_dir)->required();
    detect->add_option("--background", background_path)->required();
    detect->add_option("--extrinsic", extrinsic_path);
    detect->add_option("--out", out_path)->required();
    detect->add_option("--requests", requests_path);
    detect->add_option("--timing", timing_path);

    std::string bb_config, bb_frames, bb_out;
    auto* build_bg = app.add_subcommand("build-background", "Merge empty-road frames into a background map");
    build_bg->add_option("--config", bb_config)->required();
    build_bg->add_option("--frames", bb_frames)->required();
    build_bg->add_option("--out", bb_out)->required();

    std::string cs_pairs, cs_origin, cs_out;
    auto* cal_static = app.add_subcommand("calibrate-static", "Estimate the initial extrinsic from point pairs");
    cal_static->add_option("--pairs", cs_pairs)->required();
    cal_static->add_option("--enu-origin", cs_origin)->required();
    cal_static->add_option("--out", cs_out)->required();

    std::string ct_extrinsic, ct_out, ct_report;
    std::vector<std::string> ct_lidar, ct_gps;
    double ct_spacing = 0.5;
    auto* cal_traj = app.add_subcommand("calibrate-trajectory", "Refine yaw/planar/vertical from trajectories");
    cal_traj->add_option("--extrinsic", ct_extrinsic)->required();
    cal_traj->add_option("--lidar-traj", ct_lidar)->required();
    cal_traj->add_option("--gps-traj", ct_gps)->required();
    cal_traj->add_option("--spacing", ct_spacing);
    cal_traj->add_option("--out", ct_out)->required();
    cal_traj->add_option("--report", ct_report);

    std::string ev_ann, ev_records, ev_thresholds = "long=10,compact=4", ev_out;
    auto* eval_fsp = app.add_subcommand("eval-fsp", "Frame-level FSP trigger evaluation");
    eval_fsp->add_option("--annotations", ev_ann)->required();
    eval_fsp->add_option("--records", ev_records)->required();
    eval_fsp->add_option("--thresholds", ev_thresholds);
    eval_fsp->add_option("--out", ev_out)->required();

    std::string pf_timing, pf_out;
    double pf_budget = 0.05;
    auto* profile = app.add_subcommand("profile", "Summarize per-frame processing times");
    profile->add_option("--timing", pf_timing)->required();
    profile->add_option("--budget", pf_budget);
    profile->add_option("--out", pf_out)->required();

    std::string sy_params, sy_out_dir;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic scene with ground truth");
    synth->add_option("--params", sy_params)->required();
    synth->add_option("--out-dir", sy_out_dir)->required();

    std::string fw_in, fw_out;
    bool fw_follow = false;
    double fw_max_seconds = 30.0;
    auto* forward = app.add_subcommand("forward", "Forward a record stream to another file");
    forward->add_option("--in", fw_in)->required();
    forward->add_option("--out", fw_out)->required();
    forward->add_flag("--follow", fw_follow);
    forward->add_option("--max-seconds", fw_max_seconds);

    CLI11_PARSE(app, argc, argv);

    try {
        if (detect->parsed()) {
            return run_detect(config_path, frames_dir, background_path, extrinsic_path, out_path,
                              requests_path, timing_path);
        }
        if (build_bg->parsed()) return run_build_background(bb_config, bb_frames, bb_out);
        if (cal_static->parsed()) return run_calibrate_static(cs_pairs, cs_origin, cs_out);
        if (cal_traj->parsed()) {
            return run_calibrate_trajectory(ct_extrinsic, ct_lidar, ct_gps, ct_spacing, ct_out,
                                            ct_report);
        }
        if (eval_fsp->parsed()) return run_eval_fsp(ev_ann, ev_records, ev_thresholds, ev_out);
        if (profile->parsed()) return run_profile(pf_timing, pf_budget, pf_out);
        if (synth->parsed()) return run_synth(sy_params, sy_out_dir);
        if (forward->parsed()) return run_forward(fw_in, fw_out, fw_follow, fw_max_seconds);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
