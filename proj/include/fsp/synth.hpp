#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fsp/cloud_ops.hpp"
#include "fsp/clustering.hpp"
#include "fsp/types.hpp"

namespace fsp {

/// One scripted vehicle: a box-shaped point-cloud shell moving at constant
/// velocity in the leveled frame (road plane z = 0).
struct SynthVehicleSpec {
    VehicleClass cls = VehicleClass::NonTruck;
    double start_x = 0.0;
    double start_y = 0.0;
    double vx = 0.0;
    double vy = 0.0;
};

struct SynthRoad {
    double x_min = -10.0;
    double x_max = 200.0;
    double half_width = 8.0;
};

struct SynthSceneParams {
    std::uint64_t seed = 1;
    int n_frames = 100;
    double frame_rate_hz = 10.0;
    int n_background_frames = 5;
    double background_density = 3.0;       // road points per m^2, Poisson sampled
    double vehicle_surface_density = 8.0;  // shell points per m^2
    double noise_sigma_m = 0.02;           // Gaussian jitter on every point
    SynthRoad road;
    TiltAngles mount_tilt;  // frames are written pre-rotated into the sensor frame
    double start_timestamp = 1000.0;
    std::vector<SynthVehicleSpec> vehicles;
};

struct SynthSceneOutput {
    std::string frames_dir;
    std::string background_dir;
    std::string ground_truth_path;  // JSON-lines, one line per vehicle per frame
    std::string annotations_path;   // JSON-lines scenario annotations (primary target)
    std::string meta_path;
};

/// Physical box dimensions used for a vehicle class: length, width, height
/// above ground and ground clearance, meters.
struct VehicleDims {
    double length, width, height, clearance;
};
VehicleDims vehicle_dims(VehicleClass cls);

/// Deterministic scene generation: the seed fixes every sample, so identical
/// params produce byte-identical files. Writes background/ (static-only
/// frames), frames/ (static + vehicles), ground_truth.jsonl, annotations.jsonl
/// and scene.json under out_dir.
SynthSceneOutput synth_scene(const SynthSceneParams& params, const std::string& out_dir);

SynthSceneParams synth_params_from_json_text(const std::string& text);
std::string synth_params_to_json_text(const SynthSceneParams& params);

}  // namespace fsp
