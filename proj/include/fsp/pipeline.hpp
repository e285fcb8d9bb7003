#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "fsp/background.hpp"
#include "fsp/config.hpp"
#include "fsp/evaluation.hpp"
#include "fsp/geodesy.hpp"
#include "fsp/registration.hpp"
#include "fsp/tracker.hpp"

namespace fsp {

/// One reportable track observation emitted per frame.
struct DetectionRecord {
    std::int64_t frame_id = 0;
    double timestamp = 0.0;
    std::int64_t track_id = 0;
    VehicleClass vehicle_class = VehicleClass::NonTruck;
    Point3 position_lidar;  // leveled frame
    std::optional<EnuCoord> position_enu;        // present iff an extrinsic is loaded
    std::optional<GeodeticCoord> position_geodetic;
    double speed_mps = 0.0;  // horizontal speed
    MotionDirection direction = MotionDirection::Unknown;
    std::optional<double> toa_s;  // present only when approaching
};

std::string record_to_jsonl(const DetectionRecord& r);
DetectionRecord record_from_jsonl(const std::string& line);

struct FSPRequestMessage {
    std::string site_id;
    std::int64_t track_id = 0;
    VehicleClass vehicle_class = VehicleClass::CompactTruck;  // truck classes only
    double toa_s = 0.0;
    double issued_at = 0.0;
    std::int64_t sequence_number = 0;
};

std::string request_to_jsonl(const FSPRequestMessage& r);

/// Stateful request gate: truck class, approaching, ToA within the horizon,
/// and a per-track cooldown; sequence numbers are monotone per site.
class FspRequestEmitter {
public:
    FspRequestEmitter(std::string site_id, double horizon_s, double cooldown_s)
        : site_id_(std::move(site_id)), horizon_s_(horizon_s), cooldown_s_(cooldown_s) {}

    std::optional<FSPRequestMessage> consider(const DetectionRecord& record);

private:
    std::string site_id_;
    double horizon_s_;
    double cooldown_s_;
    std::int64_t next_sequence_ = 1;
    std::unordered_map<std::int64_t, double> last_emitted_;
};

struct FrameOutput {
    std::vector<DetectionRecord> records;
    TimingSample timing;
    // Foreground diagnostics for the frame.
    double mu_d = 0.0;
    double sigma_d = 0.0;
    double tau = 0.0;
    std::size_t cluster_count = 0;
};

/// Full per-frame chain: level -> crop -> downsample -> foreground ->
/// cluster/classify -> track -> direction/ToA -> records. Stateful across
/// frames (tracker, timestamps); feed frames in order.
class DetectionPipeline {
public:
    DetectionPipeline(PipelineConfig config, BackgroundMap background,
                      std::optional<CalibrationArtifact> extrinsic);

    /// Throws StateError when timestamps do not strictly increase.
    FrameOutput process_frame(const PointCloudFrame& raw);

    const PipelineConfig& config() const { return config_; }

private:
    PipelineConfig config_;
    BackgroundMap background_;
    std::optional<CalibrationArtifact> extrinsic_;
    RotationMatrix3 rotation_;
    MultiObjectTracker tracker_;
    std::optional<double> prev_timestamp_;
};

struct ReplaySinks {
    std::function<void(const DetectionRecord&)> on_record;
    std::function<void(const FSPRequestMessage&)> on_request;
    std::function<void(const TimingSample&)> on_timing;
    std::function<void(const std::string&)> on_warning;
};

struct ReplaySummary {
    std::size_t frames_processed = 0;
    std::size_t frames_skipped = 0;
    std::size_t records_emitted = 0;
    std::size_t requests_emitted = 0;
};

/// Replay a frame directory through the pipeline in frame_id order; malformed
/// frames are skipped with a warning and counted, never silently dropped.
ReplaySummary replay_directory(const PipelineConfig& config, const std::string& frames_dir,
                               BackgroundMap background,
                               std::optional<CalibrationArtifact> extrinsic,
                               const ReplaySinks& sinks);

}  // namespace fsp
