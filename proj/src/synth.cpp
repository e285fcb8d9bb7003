#include "fsp/synth.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include <json.hpp>

#include "fsp/frame_io.hpp"

namespace fsp {

namespace {

namespace fs = std::filesystem;
using Rng = std::mt19937_64;

VehicleClass parse_synth_class(const std::string& s) { return vehicle_class_from_string(s); }

struct StaticSceneSpec {
    struct Pole {
        double x, y;
    };
    std::vector<Pole> poles;
};

StaticSceneSpec make_static_spec(const SynthRoad& road) {
    StaticSceneSpec spec;
    // A pole pair every ~50 m along the roadside, just inside the shoulders.
    for (double x = road.x_min + 10.0; x < road.x_max; x += 50.0) {
        spec.poles.push_back({x, road.half_width - 0.5});
        spec.poles.push_back({x, -(road.half_width - 0.5)});
    }
    return spec;
}

void append_static_scene(const SynthSceneParams& p, const StaticSceneSpec& spec, Rng& rng,
                         std::vector<Point3>& out) {
    const double area = (p.road.x_max - p.road.x_min) * (2.0 * p.road.half_width);
    std::poisson_distribution<int> count_dist(p.background_density * area);
    std::uniform_real_distribution<double> ux(p.road.x_min, p.road.x_max);
    std::uniform_real_distribution<double> uy(-p.road.half_width, p.road.half_width);
    std::normal_distribution<double> noise(0.0, p.noise_sigma_m);

    const int n_road = count_dist(rng);
    for (int i = 0; i < n_road; ++i) {
        out.push_back({ux(rng) + noise(rng), uy(rng) + noise(rng), noise(rng)});
    }

    std::uniform_real_distribution<double> uz(0.0, 6.0);
    std::normal_distribution<double> jitter(0.0, 0.05);
    for (const auto& pole : spec.poles) {
        for (int i = 0; i < 40; ++i) {
            out.push_back({pole.x + jitter(rng) + noise(rng), pole.y + jitter(rng) + noise(rng),
                           uz(rng) + noise(rng)});
        }
    }
}

void append_vehicle_shell(const SynthVehicleSpec& v, const VehicleDims& dims, double t, Rng& rng,
                          double surface_density, double noise_sigma,
                          std::vector<Point3>& out) {
    const double cx = v.start_x + v.vx * t;
    const double cy = v.start_y + v.vy * t;
    const double speed = std::hypot(v.vx, v.vy);
    const double ux = speed > 0 ? v.vx / speed : 1.0;
    const double uy = speed > 0 ? v.vy / speed : 0.0;
    const double wx = -uy, wy = ux;  // transverse axis

    const double z0 = dims.clearance, z1 = dims.height;
    std::normal_distribution<double> noise(0.0, noise_sigma);
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    auto emit = [&](double along, double across, double z) {
        out.push_back({cx + ux * along + wx * across + noise(rng),
                       cy + uy * along + wy * across + noise(rng), z + noise(rng)});
    };

    const double dz = z1 - z0;
    struct Face {
        double area;
        int kind;  // 0 top, 1/2 sides, 3/4 ends
    };
    const Face faces[5] = {{dims.length * dims.width, 0},
                           {dims.length * dz, 1},
                           {dims.length * dz, 2},
                           {dims.width * dz, 3},
                           {dims.width * dz, 4}};
    for (const Face& f : faces) {
        std::poisson_distribution<int> count_dist(surface_density * f.area);
        const int n = count_dist(rng);
        for (int i = 0; i < n; ++i) {
            const double a = (u01(rng) - 0.5);
            const double b = u01(rng);
            switch (f.kind) {
                case 0: emit(a * dims.length, (b - 0.5) * dims.width, z1); break;
                case 1: emit(a * dims.length, dims.width / 2, z0 + b * dz); break;
                case 2: emit(a * dims.length, -dims.width / 2, z0 + b * dz); break;
                case 3: emit(dims.length / 2, a * dims.width, z0 + b * dz); break;
                default: emit(-dims.length / 2, a * dims.width, z0 + b * dz); break;
            }
        }
    }
}

}  // namespace

VehicleDims vehicle_dims(VehicleClass cls) {
    switch (cls) {
        case VehicleClass::LongTruck: return {13.5, 2.6, 3.8, 0.3};
        case VehicleClass::CompactTruck: return {7.5, 2.6, 3.5, 0.3};
        default: return {4.5, 1.8, 1.5, 0.2};
    }
}

SynthSceneOutput synth_scene(const SynthSceneParams& p, const std::string& out_dir) {
    if (p.n_frames < 1 || p.n_background_frames < 1) {
        throw InvalidParameterError("synth scene needs n_frames >= 1 and n_background_frames >= 1");
    }
    if (!(p.frame_rate_hz > 0) || !(p.background_density > 0) ||
        !(p.vehicle_surface_density > 0) || !(p.noise_sigma_m >= 0)) {
        throw InvalidParameterError("synth scene parameters out of range");
    }
    if (!(p.road.x_min < p.road.x_max) || !(p.road.half_width > 0)) {
        throw InvalidParameterError("synth road geometry out of range");
    }

    SynthSceneOutput out;
    out.frames_dir = (fs::path(out_dir) / "frames").string();
    out.background_dir = (fs::path(out_dir) / "background").string();
    out.ground_truth_path = (fs::path(out_dir) / "ground_truth.jsonl").string();
    out.annotations_path = (fs::path(out_dir) / "annotations.jsonl").string();
    out.meta_path = (fs::path(out_dir) / "scene.json").string();
    fs::create_directories(out.frames_dir);
    fs::create_directories(out.background_dir);

    const RotationMatrix3 mount = build_rotation(p.mount_tilt);
    const bool tilted = p.mount_tilt.roll_phi != 0.0 || p.mount_tilt.pitch_theta != 0.0;
    auto to_sensor_frame = [&](std::vector<Point3>& pts) {
        if (!tilted) return;
        for (Point3& q : pts) {
            const Eigen::Vector3d v = mount * Eigen::Vector3d(q.x, q.y, q.z);
            q = {v.x(), v.y(), v.z()};
        }
    };

    Rng rng(p.seed);
    const StaticSceneSpec static_spec = make_static_spec(p.road);
    const double dt = 1.0 / p.frame_rate_hz;

    char name[64];
    for (int k = 0; k < p.n_background_frames; ++k) {
        PointCloudFrame frame;
        frame.frame_id = k;
        frame.timestamp = p.start_timestamp - (p.n_background_frames - k) * dt;
        frame.tag = FrameTag::SensorFrame;
        append_static_scene(p, static_spec, rng, frame.points);
        to_sensor_frame(frame.points);
        std::snprintf(name, sizeof(name), "frame_%06d.txt", k);
        write_frame_file(frame, (fs::path(out.background_dir) / name).string());
    }

    std::ofstream gt(out.ground_truth_path);
    std::ofstream ann(out.annotations_path);
    if (!gt || !ann) throw IoError("cannot write ground truth under " + out_dir);

    for (int k = 0; k < p.n_frames; ++k) {
        const double t = k * dt;
        PointCloudFrame frame;
        frame.frame_id = k;
        frame.timestamp = p.start_timestamp + t;
        frame.tag = FrameTag::SensorFrame;
        append_static_scene(p, static_spec, rng, frame.points);

        // Primary target: the truck nearest the road origin, else nearest car.
        int primary = -1;
        double primary_dist = std::numeric_limits<double>::infinity();
        bool primary_is_truck = false;

        for (std::size_t vi = 0; vi < p.vehicles.size(); ++vi) {
            const SynthVehicleSpec& v = p.vehicles[vi];
            const VehicleDims dims = vehicle_dims(v.cls);
            append_vehicle_shell(v, dims, t, rng, p.vehicle_surface_density, p.noise_sigma_m,
                                 frame.points);

            const double cx = v.start_x + v.vx * t;
            const double cy = v.start_y + v.vy * t;
            const double cz = (dims.clearance + dims.height) / 2.0;
            nlohmann::ordered_json line;
            line["frame_id"] = k;
            line["timestamp"] = frame.timestamp;
            line["vehicle_id"] = vi;
            line["class"] = to_string(v.cls);
            line["center"] = {cx, cy, cz};
            line["velocity"] = {v.vx, v.vy, 0.0};
            gt << line.dump() << "\n";

            const bool is_truck = v.cls != VehicleClass::NonTruck;
            const double d = std::hypot(cx, cy);
            if ((is_truck && !primary_is_truck) ||
                (is_truck == primary_is_truck && d < primary_dist)) {
                primary = static_cast<int>(vi);
                primary_dist = d;
                primary_is_truck = is_truck;
            }
        }

        std::snprintf(name, sizeof(name), "frame_%06d.txt", k);
        if (primary >= 0) {
            const SynthVehicleSpec& v = p.vehicles[static_cast<std::size_t>(primary)];
            const VehicleDims dims = vehicle_dims(v.cls);
            nlohmann::ordered_json line;
            char sid[32];
            std::snprintf(sid, sizeof(sid), "scenario_%06d", k);
            line["scenario_id"] = sid;
            line["frame_file"] = name;
            line["frame_id"] = k;
            line["gt_class"] = to_string(v.cls);
            line["gt_position"] = {v.start_x + v.vx * t, v.start_y + v.vy * t,
                                   (dims.clearance + dims.height) / 2.0};
            ann << line.dump() << "\n";
        }

        to_sensor_frame(frame.points);
        write_frame_file(frame, (fs::path(out.frames_dir) / name).string());
    }

    nlohmann::ordered_json meta;
    meta["params"] = nlohmann::json::parse(synth_params_to_json_text(p));
    meta["frames_dir"] = "frames";
    meta["background_dir"] = "background";
    meta["ground_truth"] = "ground_truth.jsonl";
    meta["annotations"] = "annotations.jsonl";
    write_text_file(out.meta_path, meta.dump(2) + "\n");
    return out;
}

SynthSceneParams synth_params_from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidParameterError(std::string("synth params are not valid JSON: ") + e.what());
    }
    SynthSceneParams p;
    p.seed = j.value("seed", p.seed);
    p.n_frames = j.value("n_frames", p.n_frames);
    p.frame_rate_hz = j.value("frame_rate_hz", p.frame_rate_hz);
    p.n_background_frames = j.value("n_background_frames", p.n_background_frames);
    p.background_density = j.value("background_density", p.background_density);
    p.vehicle_surface_density = j.value("vehicle_surface_density", p.vehicle_surface_density);
    p.noise_sigma_m = j.value("noise_sigma_m", p.noise_sigma_m);
    p.start_timestamp = j.value("start_timestamp", p.start_timestamp);
    if (j.contains("road")) {
        p.road.x_min = j["road"].value("x_min", p.road.x_min);
        p.road.x_max = j["road"].value("x_max", p.road.x_max);
        p.road.half_width = j["road"].value("half_width", p.road.half_width);
    }
    if (j.contains("tilt")) {
        p.mount_tilt.roll_phi = j["tilt"].value("roll_phi", 0.0);
        p.mount_tilt.pitch_theta = j["tilt"].value("pitch_theta", 0.0);
    }
    auto read_vehicle = [](const nlohmann::json& v, VehicleClass fallback_cls) {
        SynthVehicleSpec s;
        s.cls = v.contains("class") ? parse_synth_class(v["class"].get<std::string>())
                                    : fallback_cls;
        const auto& start = v.at("start");
        s.start_x = start.at(0).get<double>();
        s.start_y = start.at(1).get<double>();
        const auto& vel = v.at("velocity");
        s.vx = vel.at(0).get<double>();
        s.vy = vel.at(1).get<double>();
        return s;
    };
    try {
        if (j.contains("trucks")) {
            for (const auto& v : j["trucks"]) {
                const SynthVehicleSpec s = read_vehicle(v, VehicleClass::LongTruck);
                if (s.cls == VehicleClass::NonTruck) {
                    throw InvalidParameterError("trucks[] entries must be truck classes");
                }
                p.vehicles.push_back(s);
            }
        }
        if (j.contains("cars")) {
            for (const auto& v : j["cars"]) {
                SynthVehicleSpec s = read_vehicle(v, VehicleClass::NonTruck);
                s.cls = VehicleClass::NonTruck;
                p.vehicles.push_back(s);
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw InvalidParameterError(std::string("bad vehicle spec: ") + e.what());
    }
    return p;
}

std::string synth_params_to_json_text(const SynthSceneParams& p) {
    nlohmann::ordered_json j;
    j["seed"] = p.seed;
    j["n_frames"] = p.n_frames;
    j["frame_rate_hz"] = p.frame_rate_hz;
    j["n_background_frames"] = p.n_background_frames;
    j["background_density"] = p.background_density;
    j["vehicle_surface_density"] = p.vehicle_surface_density;
    j["noise_sigma_m"] = p.noise_sigma_m;
    j["start_timestamp"] = p.start_timestamp;
    j["road"] = {{"x_min", p.road.x_min}, {"x_max", p.road.x_max},
                 {"half_width", p.road.half_width}};
    j["tilt"] = {{"roll_phi", p.mount_tilt.roll_phi}, {"pitch_theta", p.mount_tilt.pitch_theta}};
    nlohmann::ordered_json trucks = nlohmann::ordered_json::array();
    nlohmann::ordered_json cars = nlohmann::ordered_json::array();
    for (const SynthVehicleSpec& v : p.vehicles) {
        nlohmann::ordered_json e;
        e["class"] = to_string(v.cls);
        e["start"] = {v.start_x, v.start_y};
        e["velocity"] = {v.vx, v.vy};
        if (v.cls == VehicleClass::NonTruck) {
            cars.push_back(e);
        } else {
            trucks.push_back(e);
        }
    }
    j["trucks"] = trucks;
    j["cars"] = cars;
    return j.dump(2) + "\n";
}

}  // namespace fsp
