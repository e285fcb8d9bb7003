#include "fsp/background.hpp"

#include <cmath>

#include <json.hpp>

#include "fsp/cloud_ops.hpp"
#include "fsp/frame_io.hpp"

namespace fsp {

BackgroundMap BackgroundMap::build(const std::vector<PointCloudFrame>& frames,
                                   double dedup_voxel) {
    if (frames.empty()) {
        throw InvalidParameterError("background construction needs at least one frame");
    }
    if (!(dedup_voxel > 0.0)) {
        throw InvalidParameterError("dedup_voxel must be > 0");
    }
    PointCloudFrame merged;
    merged.tag = frames.front().tag;
    std::vector<std::int64_t> ids;
    ids.reserve(frames.size());
    for (const PointCloudFrame& f : frames) {
        ids.push_back(f.frame_id);
        merged.points.insert(merged.points.end(), f.points.begin(), f.points.end());
    }
    const PointCloudFrame dedup = voxel_downsample(merged, VoxelParams{dedup_voxel});
    if (dedup.points.empty()) {
        throw InvalidParameterError("background frames contain no points");
    }

    BackgroundMap map;
    map.index_ = KdTree3(dedup.points);
    map.dedup_voxel_ = dedup_voxel;
    map.source_frame_ids_ = std::move(ids);
    return map;
}

BackgroundMap BackgroundMap::from_points(std::vector<Point3> points, double dedup_voxel,
                                         std::vector<std::int64_t> source_frame_ids) {
    if (points.empty()) {
        throw InvalidParameterError("background map must be non-empty");
    }
    BackgroundMap map;
    map.index_ = KdTree3(std::move(points));
    map.dedup_voxel_ = dedup_voxel;
    map.source_frame_ids_ = std::move(source_frame_ids);
    return map;
}

ForegroundResult extract_foreground(const PointCloudFrame& frame, const BackgroundMap& map,
                                    const ForegroundParams& params) {
    if (!(params.alpha > 0.0)) {
        throw InvalidParameterError("foreground alpha must be > 0");
    }
    if (map.size() == 0) {
        throw InvalidParameterError("background map is empty");
    }
    ForegroundResult result;
    result.foreground.frame_id = frame.frame_id;
    result.foreground.timestamp = frame.timestamp;
    result.foreground.tag = frame.tag;
    result.input_count = frame.points.size();
    if (frame.points.empty()) return result;

    std::vector<double> dist(frame.points.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < frame.points.size(); ++i) {
        dist[i] = map.nearest_distance(frame.points[i]);
        sum += dist[i];
    }
    const double n = static_cast<double>(dist.size());
    const double mu = sum / n;
    double var = 0.0;
    for (double d : dist) var += (d - mu) * (d - mu);
    var /= n;  // population variance; defined even for a single point

    result.mu_d = mu;
    result.sigma_d = std::sqrt(var);
    double tau = mu + params.alpha * result.sigma_d;
    if (params.clamp_tau) {
        tau = std::min(std::max(tau, params.tau_min), params.tau_max);
    }
    result.tau = tau;

    for (std::size_t i = 0; i < frame.points.size(); ++i) {
        if (dist[i] > tau) result.foreground.points.push_back(frame.points[i]);
    }
    return result;
}

void save_background(const BackgroundMap& map, const std::string& path) {
    PointCloudFrame frame;
    frame.frame_id = 0;
    frame.timestamp = 0.0;
    frame.tag = FrameTag::LeveledFrame;
    frame.points = map.points();
    write_frame_file(frame, path);

    nlohmann::ordered_json meta;
    meta["dedup_voxel"] = map.dedup_voxel();
    meta["source_frame_ids"] = map.source_frame_ids();
    meta["created_at"] = iso8601_utc_now();
    write_text_file(path + ".meta.json", meta.dump(2) + "\n");
}

BackgroundMap load_background(const std::string& path) {
    const PointCloudFrame frame = read_frame_file(path);
    double dedup_voxel = 0.1;
    std::vector<std::int64_t> ids;
    try {
        const auto meta = nlohmann::json::parse(read_text_file(path + ".meta.json"));
        dedup_voxel = meta.at("dedup_voxel").get<double>();
        ids = meta.at("source_frame_ids").get<std::vector<std::int64_t>>();
    } catch (const nlohmann::json::exception& e) {
        throw IoError("invalid background sidecar for " + path + ": " + e.what());
    }
    return BackgroundMap::from_points(frame.points, dedup_voxel, std::move(ids));
}

}  // namespace fsp
