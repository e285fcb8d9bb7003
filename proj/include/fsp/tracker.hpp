#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fsp/clustering.hpp"
#include "fsp/kalman.hpp"
#include "fsp/types.hpp"

namespace fsp {

enum class MotionDirection { Approaching, Departing, Stationary, Unknown };

const char* to_string(MotionDirection d);
MotionDirection motion_direction_from_string(const std::string& s);

/// Per-site tracker and geometry parameters.
struct SensorSiteConfig {
    Point3 sensor_position{0, 0, 0};     // line-of-sight target, leveled frame
    Point3 stop_line_position{0, 0, 0};  // ToA target, leveled frame
    double min_speed = 0.5;              // m/s speed deadband, > 0
    double gate_radius = 5.0;            // association gate, meters, > 0
    int max_missed = 5;                  // delete when missed_frames exceeds this
    int min_hits = 3;                    // report when age_frames reaches this
};

struct Track {
    std::int64_t track_id = 0;
    KalmanState state;
    std::array<int, 3> class_votes{};  // indexed by VehicleClass enum order
    MotionDirection direction = MotionDirection::Unknown;
    int age_frames = 1;
    int missed_frames = 0;
    std::vector<std::pair<double, Point3>> history;  // (timestamp, position)
};

inline Point3 track_position(const Track& t) {
    return {t.state.x(0), t.state.x(1), t.state.x(2)};
}

inline Point3 track_velocity(const Track& t) {
    return {t.state.x(3), t.state.x(4), t.state.x(5)};
}

/// Majority vote over accumulated class votes; ties resolve toward the larger
/// class (LongTruck over CompactTruck over NonTruck) to favor recall.
VehicleClass track_class(const Track& track);

inline bool is_reportable(const Track& track, const SensorSiteConfig& cfg) {
    return track.age_frames >= cfg.min_hits;
}

/// Sign of the dot product between the velocity and the line-of-sight vector
/// b = sensor - position. Speeds below min_speed classify as Stationary and
/// an exactly-zero dot product as Unknown.
MotionDirection motion_direction(const Track& track, const SensorSiteConfig& cfg);

/// Horizontal stop-line distance over horizontal speed, defined only for
/// approaching tracks moving at least min_speed.
std::optional<double> estimate_toa(const Track& track, const SensorSiteConfig& cfg);

/// Single-writer multi-object tracker: predict, greedy gated nearest-neighbor
/// association, update/spawn/retire, then refresh directions.
class MultiObjectTracker {
public:
    /// Advance one frame. Detections are cluster centroids with class labels;
    /// timestamp enters track history. Throws on dt <= 0.
    void step(const std::vector<Cluster>& detections, double dt, double timestamp,
              const SensorSiteConfig& cfg, const NoiseParams& noise);

    const std::vector<Track>& tracks() const { return tracks_; }
    std::vector<const Track*> reportable(const SensorSiteConfig& cfg) const;

private:
    std::vector<Track> tracks_;
    std::int64_t next_track_id_ = 1;
};

}  // namespace fsp
