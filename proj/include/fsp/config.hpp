#pragma once

#include <optional>
#include <string>

#include "fsp/background.hpp"
#include "fsp/cloud_ops.hpp"
#include "fsp/clustering.hpp"
#include "fsp/tracker.hpp"

namespace fsp {

/// Process/measurement noise coefficients; the per-step covariances come from
/// make_noise_params with the actual frame dt.
struct NoiseCoefficients {
    double q_pos = 0.1;    // position variance rate, q_pos * dt^2
    double q_vel = 1.0;    // velocity variance rate, q_vel * dt
    double r_sigma = 0.2;  // measurement sigma per axis, meters
};

struct BackgroundBuildConfig {
    double dedup_voxel = 0.1;  // meters
};

/// Aggregated site configuration for the whole pipeline, loaded from a single
/// JSON document with one section per module. Unknown keys are rejected.
struct PipelineConfig {
    std::string site_id = "site-0";
    TiltAngles tilt;
    RegionOfInterest roi;
    VoxelParams voxel{0.2};
    ForegroundParams foreground;
    BackgroundBuildConfig background;
    DbscanParams dbscan;
    ClassifierThresholds classifier;
    SensorSiteConfig tracker;
    NoiseCoefficients noise;
    std::optional<std::string> extrinsic_path;
    double frame_rate_hz = 10.0;
    double request_horizon_s = 30.0;
    double request_cooldown_s = 10.0;
};

/// Throws InvalidParameterError naming the offending key or value.
void validate(const PipelineConfig& config);

PipelineConfig config_from_json_text(const std::string& text);
PipelineConfig load_config(const std::string& path);
std::string config_to_json_text(const PipelineConfig& config);

}  // namespace fsp
