#include "fsp/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>

#include <json.hpp>

#include "fsp/frame_io.hpp"
#include "fsp/kalman.hpp"

namespace fsp {

namespace {

nlohmann::ordered_json point_array(const Point3& p) {
    return nlohmann::ordered_json::array({p.x, p.y, p.z});
}

}  // namespace

std::string record_to_jsonl(const DetectionRecord& r) {
    nlohmann::ordered_json j;
    j["frame_id"] = r.frame_id;
    j["timestamp"] = r.timestamp;
    j["track_id"] = r.track_id;
    j["vehicle_class"] = to_string(r.vehicle_class);
    j["position_lidar"] = point_array(r.position_lidar);
    if (r.position_enu) {
        j["position_enu"] = {r.position_enu->east, r.position_enu->north, r.position_enu->up};
    }
    if (r.position_geodetic) {
        j["position_geodetic"] = {{"lat", r.position_geodetic->latitude_deg},
                                  {"lon", r.position_geodetic->longitude_deg},
                                  {"alt", r.position_geodetic->altitude_m}};
    }
    j["speed_mps"] = r.speed_mps;
    j["direction"] = to_string(r.direction);
    if (r.toa_s) j["toa_s"] = *r.toa_s;
    return j.dump();
}

DetectionRecord record_from_jsonl(const std::string& line) {
    DetectionRecord r;
    try {
        const auto j = nlohmann::json::parse(line);
        r.frame_id = j.at("frame_id").get<std::int64_t>();
        r.timestamp = j.at("timestamp").get<double>();
        r.track_id = j.at("track_id").get<std::int64_t>();
        r.vehicle_class = vehicle_class_from_string(j.at("vehicle_class").get<std::string>());
        const auto& p = j.at("position_lidar");
        r.position_lidar = {p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()};
        if (j.contains("position_enu")) {
            const auto& e = j.at("position_enu");
            r.position_enu = EnuCoord{e.at(0).get<double>(), e.at(1).get<double>(),
                                      e.at(2).get<double>()};
        }
        if (j.contains("position_geodetic")) {
            const auto& g = j.at("position_geodetic");
            r.position_geodetic = GeodeticCoord{g.at("lat").get<double>(),
                                                g.at("lon").get<double>(),
                                                g.at("alt").get<double>()};
        }
        r.speed_mps = j.at("speed_mps").get<double>();
        r.direction = motion_direction_from_string(j.at("direction").get<std::string>());
        if (j.contains("toa_s")) r.toa_s = j.at("toa_s").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("invalid detection record line: ") + e.what());
    }
    return r;
}

std::string request_to_jsonl(const FSPRequestMessage& r) {
    nlohmann::ordered_json j;
    j["site_id"] = r.site_id;
    j["track_id"] = r.track_id;
    j["vehicle_class"] = to_string(r.vehicle_class);
    j["toa_s"] = r.toa_s;
    j["issued_at"] = r.issued_at;
    j["sequence_number"] = r.sequence_number;
    return j.dump();
}

std::optional<FSPRequestMessage> FspRequestEmitter::consider(const DetectionRecord& record) {
    if (record.vehicle_class == VehicleClass::NonTruck) return std::nullopt;
    if (record.direction != MotionDirection::Approaching) return std::nullopt;
    if (!record.toa_s || *record.toa_s > horizon_s_) return std::nullopt;

    const auto it = last_emitted_.find(record.track_id);
    if (it != last_emitted_.end() && record.timestamp - it->second < cooldown_s_) {
        return std::nullopt;
    }
    last_emitted_[record.track_id] = record.timestamp;

    FSPRequestMessage msg;
    msg.site_id = site_id_;
    msg.track_id = record.track_id;
    msg.vehicle_class = record.vehicle_class;
    msg.toa_s = *record.toa_s;
    msg.issued_at = record.timestamp;
    msg.sequence_number = next_sequence_++;
    return msg;
}

DetectionPipeline::DetectionPipeline(PipelineConfig config, BackgroundMap background,
                                     std::optional<CalibrationArtifact> extrinsic)
    : config_(std::move(config)),
      background_(std::move(background)),
      extrinsic_(std::move(extrinsic)) {
    validate(config_);
    if (background_.size() == 0) {
        throw InvalidParameterError("detection pipeline needs a non-empty background map");
    }
    rotation_ = build_rotation(config_.tilt);
}

FrameOutput DetectionPipeline::process_frame(const PointCloudFrame& raw) {
    if (prev_timestamp_ && !(raw.timestamp > *prev_timestamp_)) {
        throw StateError("frame timestamps must strictly increase (frame " +
                         std::to_string(raw.frame_id) + ")");
    }
    const auto t0 = std::chrono::steady_clock::now();

    const PointCloudFrame leveled = correct_frame(raw, rotation_);
    const PointCloudFrame cropped = crop_roi(leveled, config_.roi);
    const PointCloudFrame downsampled = voxel_downsample(cropped, config_.voxel);
    const ForegroundResult fg = extract_foreground(downsampled, background_, config_.foreground);
    const DbscanResult clusters = dbscan(fg.foreground.points, config_.dbscan);

    std::vector<Cluster> detections;
    detections.reserve(clusters.clusters.size());
    for (std::size_t ci = 0; ci < clusters.clusters.size(); ++ci) {
        std::vector<Point3> members;
        members.reserve(clusters.clusters[ci].size());
        for (std::size_t idx : clusters.clusters[ci]) members.push_back(fg.foreground.points[idx]);
        Cluster c = cluster_features(members);
        c.cluster_id = static_cast<std::int64_t>(ci);
        c.label = classify_vehicle(c, config_.classifier);
        detections.push_back(std::move(c));
    }

    const double dt = prev_timestamp_ ? raw.timestamp - *prev_timestamp_
                                      : 1.0 / config_.frame_rate_hz;
    prev_timestamp_ = raw.timestamp;
    const NoiseParams noise =
        make_noise_params(dt, config_.noise.q_pos, config_.noise.q_vel, config_.noise.r_sigma);
    tracker_.step(detections, dt, raw.timestamp, config_.tracker, noise);

    FrameOutput out;
    out.mu_d = fg.mu_d;
    out.sigma_d = fg.sigma_d;
    out.tau = fg.tau;
    out.cluster_count = detections.size();

    for (const Track* t : tracker_.reportable(config_.tracker)) {
        DetectionRecord rec;
        rec.frame_id = raw.frame_id;
        rec.timestamp = raw.timestamp;
        rec.track_id = t->track_id;
        rec.vehicle_class = track_class(*t);
        rec.position_lidar = track_position(*t);
        const Point3 v = track_velocity(*t);
        rec.speed_mps = std::hypot(v.x, v.y);
        rec.direction = t->direction;
        rec.toa_s = estimate_toa(*t, config_.tracker);
        if (extrinsic_) {
            rec.position_enu = apply_extrinsic(extrinsic_->transform, rec.position_lidar);
            rec.position_geodetic = enu_to_geodetic(*rec.position_enu, extrinsic_->enu_reference);
        }
        out.records.push_back(std::move(rec));
    }

    const auto t1 = std::chrono::steady_clock::now();
    out.timing.frame_id = raw.frame_id;
    out.timing.foreground_point_count =
        static_cast<std::int64_t>(fg.foreground.points.size());
    out.timing.processing_seconds =
        std::max(std::chrono::duration<double>(t1 - t0).count(), 1e-9);
    return out;
}

ReplaySummary replay_directory(const PipelineConfig& config, const std::string& frames_dir,
                               BackgroundMap background,
                               std::optional<CalibrationArtifact> extrinsic,
                               const ReplaySinks& sinks) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(frames_dir)) throw IoError("not a directory: " + frames_dir);

    DetectionPipeline pipeline(config, std::move(background), std::move(extrinsic));
    FspRequestEmitter emitter(config.site_id, config.request_horizon_s, config.request_cooldown_s);
    ReplaySummary summary;

    // Malformed files are skipped with a warning, never silently dropped;
    // readable frames replay in frame_id order regardless of file names.
    std::vector<std::string> paths;
    for (const auto& e : fs::directory_iterator(frames_dir)) {
        if (e.is_regular_file()) paths.push_back(e.path().string());
    }
    std::sort(paths.begin(), paths.end());

    std::vector<PointCloudFrame> frames;
    frames.reserve(paths.size());
    for (const std::string& path : paths) {
        try {
            frames.push_back(read_frame_file(path));
        } catch (const IoError& e) {
            ++summary.frames_skipped;
            if (sinks.on_warning) sinks.on_warning(std::string("skipping frame: ") + e.what());
        }
    }
    std::stable_sort(frames.begin(), frames.end(),
                     [](const PointCloudFrame& a, const PointCloudFrame& b) {
                         return a.frame_id < b.frame_id;
                     });

    for (const PointCloudFrame& frame : frames) {
        FrameOutput out;
        try {
            out = pipeline.process_frame(frame);
        } catch (const StateError& e) {
            ++summary.frames_skipped;
            if (sinks.on_warning) sinks.on_warning(std::string("skipping frame: ") + e.what());
            continue;
        }
        ++summary.frames_processed;
        if (sinks.on_timing) sinks.on_timing(out.timing);
        for (const DetectionRecord& rec : out.records) {
            ++summary.records_emitted;
            if (sinks.on_record) sinks.on_record(rec);
            if (const auto msg = emitter.consider(rec)) {
                ++summary.requests_emitted;
                if (sinks.on_request) sinks.on_request(*msg);
            }
        }
    }
    return summary;
}

}  // namespace fsp
