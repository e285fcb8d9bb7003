#include "fsp/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fsp {

const char* to_string(MotionDirection d) {
    switch (d) {
        case MotionDirection::Approaching: return "Approaching";
        case MotionDirection::Departing: return "Departing";
        case MotionDirection::Stationary: return "Stationary";
        default: return "Unknown";
    }
}

MotionDirection motion_direction_from_string(const std::string& s) {
    if (s == "Approaching") return MotionDirection::Approaching;
    if (s == "Departing") return MotionDirection::Departing;
    if (s == "Stationary") return MotionDirection::Stationary;
    if (s == "Unknown") return MotionDirection::Unknown;
    throw InvalidParameterError("unknown motion direction '" + s + "'");
}

VehicleClass track_class(const Track& track) {
    // Tie-break order favors the larger class.
    static constexpr VehicleClass kOrder[] = {VehicleClass::LongTruck, VehicleClass::CompactTruck,
                                              VehicleClass::NonTruck};
    VehicleClass best = VehicleClass::NonTruck;
    int best_votes = -1;
    for (VehicleClass c : kOrder) {
        const int v = track.class_votes[static_cast<std::size_t>(c)];
        if (v > best_votes) {
            best_votes = v;
            best = c;
        }
    }
    return best;
}

MotionDirection motion_direction(const Track& track, const SensorSiteConfig& cfg) {
    const Point3 a = track_velocity(track);
    if (norm(a) < cfg.min_speed) return MotionDirection::Stationary;
    const Point3 b = cfg.sensor_position - track_position(track);
    const double d = dot(a, b);
    if (d > 0.0) return MotionDirection::Approaching;
    if (d < 0.0) return MotionDirection::Departing;
    return MotionDirection::Unknown;
}

std::optional<double> estimate_toa(const Track& track, const SensorSiteConfig& cfg) {
    if (track.direction != MotionDirection::Approaching) return std::nullopt;
    const Point3 v = track_velocity(track);
    const double speed_h = std::hypot(v.x, v.y);
    if (speed_h < cfg.min_speed) return std::nullopt;
    return horizontal_distance(cfg.stop_line_position, track_position(track)) / speed_h;
}

void MultiObjectTracker::step(const std::vector<Cluster>& detections, double dt, double timestamp,
                              const SensorSiteConfig& cfg, const NoiseParams& noise) {
    if (!(dt > 0.0)) throw InvalidParameterError("tracker step requires dt > 0");

    for (Track& t : tracks_) {
        t.state = kf_predict(t.state, dt, noise.Q);
    }

    // Candidate pairs inside the gate, greedily consumed closest-first.
    // Ties break on lower track_id then lower detection index so that the
    // pairing is independent of detection ordering.
    struct Candidate {
        double dist;
        std::size_t track_idx;
        std::size_t det_idx;
    };
    std::vector<Candidate> candidates;
    for (std::size_t ti = 0; ti < tracks_.size(); ++ti) {
        const Point3 pred = track_position(tracks_[ti]);
        for (std::size_t di = 0; di < detections.size(); ++di) {
            const double d = distance(pred, detections[di].centroid);
            if (d <= cfg.gate_radius) candidates.push_back({d, ti, di});
        }
    }
    std::sort(candidates.begin(), candidates.end(), [&](const Candidate& a, const Candidate& b) {
        if (a.dist != b.dist) return a.dist < b.dist;
        if (tracks_[a.track_idx].track_id != tracks_[b.track_idx].track_id) {
            return tracks_[a.track_idx].track_id < tracks_[b.track_idx].track_id;
        }
        return a.det_idx < b.det_idx;
    });

    std::vector<bool> track_matched(tracks_.size(), false);
    std::vector<bool> det_matched(detections.size(), false);
    for (const Candidate& c : candidates) {
        if (track_matched[c.track_idx] || det_matched[c.det_idx]) continue;
        track_matched[c.track_idx] = true;
        det_matched[c.det_idx] = true;

        Track& t = tracks_[c.track_idx];
        const Cluster& det = detections[c.det_idx];
        t.state = kf_update(t.state, det.centroid, noise.R).state;
        t.class_votes[static_cast<std::size_t>(det.label)] += 1;
        t.missed_frames = 0;
    }

    // Coasting tracks age out once missed_frames exceeds max_missed.
    std::vector<Track> survivors;
    survivors.reserve(tracks_.size() + detections.size());
    for (std::size_t ti = 0; ti < tracks_.size(); ++ti) {
        Track& t = tracks_[ti];
        t.age_frames += 1;
        if (!track_matched[ti]) {
            t.missed_frames += 1;
            if (t.missed_frames > cfg.max_missed) continue;
        }
        t.history.emplace_back(timestamp, track_position(t));
        survivors.push_back(std::move(t));
    }

    for (std::size_t di = 0; di < detections.size(); ++di) {
        if (det_matched[di]) continue;
        const Cluster& det = detections[di];
        Track t;
        t.track_id = next_track_id_++;
        t.state.x << det.centroid.x, det.centroid.y, det.centroid.z, 0.0, 0.0, 0.0;
        t.state.P = Matrix6::Zero();
        t.state.P.topLeftCorner<3, 3>() = noise.R;
        t.state.P.bottomRightCorner<3, 3>() = 25.0 * Eigen::Matrix3d::Identity();
        t.class_votes[static_cast<std::size_t>(det.label)] += 1;
        t.age_frames = 1;
        t.missed_frames = 0;
        t.history.emplace_back(timestamp, det.centroid);
        survivors.push_back(std::move(t));
    }

    tracks_ = std::move(survivors);
    for (Track& t : tracks_) {
        t.direction = motion_direction(t, cfg);
    }
}

std::vector<const Track*> MultiObjectTracker::reportable(const SensorSiteConfig& cfg) const {
    std::vector<const Track*> out;
    for (const Track& t : tracks_) {
        if (is_reportable(t, cfg)) out.push_back(&t);
    }
    return out;
}

}  // namespace fsp
