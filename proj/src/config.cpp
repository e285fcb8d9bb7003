#include "fsp/config.hpp"

#include <cmath>
#include <set>

#include <json.hpp>

#include "fsp/frame_io.hpp"

namespace fsp {

namespace {

using nlohmann::json;

// Fail fast on typos: every object may only carry keys we know about.
void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
    for (const auto& item : j.items()) {
        if (!allowed.count(item.key())) {
            throw InvalidParameterError("unknown config key '" + item.key() + "' in " + where);
        }
    }
}

double get_number(const json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) {
        throw InvalidParameterError(std::string("config key '") + key + "' must be a number");
    }
    return j.at(key).get<double>();
}

int get_int(const json& j, const char* key, int fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number_integer()) {
        throw InvalidParameterError(std::string("config key '") + key + "' must be an integer");
    }
    return j.at(key).get<int>();
}

bool get_bool(const json& j, const char* key, bool fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_boolean()) {
        throw InvalidParameterError(std::string("config key '") + key + "' must be a boolean");
    }
    return j.at(key).get<bool>();
}

Point3 get_point(const json& j, const char* key, const Point3& fallback) {
    if (!j.contains(key)) return fallback;
    const auto& arr = j.at(key);
    if (!arr.is_array() || arr.size() != 3) {
        throw InvalidParameterError(std::string("config key '") + key +
                                    "' must be an array of 3 numbers");
    }
    return {arr[0].get<double>(), arr[1].get<double>(), arr[2].get<double>()};
}

}  // namespace

void validate(const PipelineConfig& c) {
    if (!(std::abs(c.tilt.roll_phi) <= 1.5707963267948966) ||
        !(std::abs(c.tilt.pitch_theta) <= 1.5707963267948966)) {
        throw InvalidParameterError("config tilt angles must lie in (-pi/2, pi/2)");
    }
    validate_roi(c.roi);
    if (!(c.voxel.voxel_size_sv > 0)) throw InvalidParameterError("config voxel.size must be > 0");
    if (!(c.foreground.alpha > 0)) throw InvalidParameterError("config foreground.alpha must be > 0");
    if (c.foreground.clamp_tau && !(c.foreground.tau_min <= c.foreground.tau_max)) {
        throw InvalidParameterError("config foreground clamp requires tau_min <= tau_max");
    }
    if (!(c.background.dedup_voxel > 0)) {
        throw InvalidParameterError("config background.dedup_voxel must be > 0");
    }
    if (!(c.dbscan.epsilon > 0) || c.dbscan.min_pts < 1) {
        throw InvalidParameterError("config dbscan requires epsilon > 0 and min_pts >= 1");
    }
    if (!(c.classifier.min_abs_height_truck > 0) || !(c.classifier.min_sigma_z_truck > 0) ||
        !(c.classifier.min_length_long > 0) || !std::isfinite(c.classifier.min_hmax_truck)) {
        throw InvalidParameterError("config classifier thresholds out of range");
    }
    if (!(c.tracker.min_speed > 0) || !(c.tracker.gate_radius > 0) || c.tracker.max_missed < 0 ||
        c.tracker.min_hits < 1) {
        throw InvalidParameterError("config tracker parameters out of range");
    }
    if (!(c.noise.q_pos >= 0) || !(c.noise.q_vel >= 0) || !(c.noise.r_sigma > 0)) {
        throw InvalidParameterError("config noise coefficients out of range");
    }
    if (!(c.frame_rate_hz > 0)) throw InvalidParameterError("config frame_rate_hz must be > 0");
    if (!(c.request_horizon_s > 0) || !(c.request_cooldown_s >= 0)) {
        throw InvalidParameterError("config request horizon/cooldown out of range");
    }
}

PipelineConfig config_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw InvalidParameterError(std::string("config is not valid JSON: ") + e.what());
    }

    reject_unknown_keys(j,
                        {"site_id", "tilt", "roi", "voxel", "foreground", "background", "dbscan",
                         "classifier", "tracker", "noise", "extrinsic_path", "frame_rate_hz",
                         "request_horizon_s", "request_cooldown_s"},
                        "top level");

    PipelineConfig c;
    if (j.contains("site_id")) c.site_id = j.at("site_id").get<std::string>();

    if (j.contains("tilt")) {
        const auto& t = j.at("tilt");
        reject_unknown_keys(t, {"roll_phi", "pitch_theta"}, "tilt");
        c.tilt.roll_phi = get_number(t, "roll_phi", 0.0);
        c.tilt.pitch_theta = get_number(t, "pitch_theta", 0.0);
    }

    if (j.contains("roi")) {
        const auto& r = j.at("roi");
        reject_unknown_keys(r, {"polygon_xy", "z_min", "z_max"}, "roi");
        if (r.contains("polygon_xy")) {
            c.roi.polygon_xy.clear();
            for (const auto& v : r.at("polygon_xy")) {
                if (!v.is_array() || v.size() != 2) {
                    throw InvalidParameterError("roi.polygon_xy entries must be [x, y]");
                }
                c.roi.polygon_xy.push_back({v[0].get<double>(), v[1].get<double>()});
            }
        }
        c.roi.z_min = get_number(r, "z_min", c.roi.z_min);
        c.roi.z_max = get_number(r, "z_max", c.roi.z_max);
    } else {
        throw InvalidParameterError("config requires an roi section");
    }

    if (j.contains("voxel")) {
        const auto& v = j.at("voxel");
        reject_unknown_keys(v, {"size"}, "voxel");
        c.voxel.voxel_size_sv = get_number(v, "size", c.voxel.voxel_size_sv);
    }

    if (j.contains("foreground")) {
        const auto& f = j.at("foreground");
        reject_unknown_keys(f, {"alpha", "clamp_tau", "tau_min", "tau_max"}, "foreground");
        c.foreground.alpha = get_number(f, "alpha", c.foreground.alpha);
        c.foreground.clamp_tau = get_bool(f, "clamp_tau", c.foreground.clamp_tau);
        c.foreground.tau_min = get_number(f, "tau_min", c.foreground.tau_min);
        c.foreground.tau_max = get_number(f, "tau_max", c.foreground.tau_max);
    }

    if (j.contains("background")) {
        const auto& b = j.at("background");
        reject_unknown_keys(b, {"dedup_voxel"}, "background");
        c.background.dedup_voxel = get_number(b, "dedup_voxel", c.background.dedup_voxel);
    }

    if (j.contains("dbscan")) {
        const auto& d = j.at("dbscan");
        reject_unknown_keys(d, {"epsilon", "min_pts"}, "dbscan");
        c.dbscan.epsilon = get_number(d, "epsilon", c.dbscan.epsilon);
        c.dbscan.min_pts = get_int(d, "min_pts", c.dbscan.min_pts);
    }

    if (j.contains("classifier")) {
        const auto& cl = j.at("classifier");
        reject_unknown_keys(cl,
                            {"min_abs_height_truck", "min_hmax_truck", "min_sigma_z_truck",
                             "min_length_long", "ground_z"},
                            "classifier");
        c.classifier.min_abs_height_truck =
            get_number(cl, "min_abs_height_truck", c.classifier.min_abs_height_truck);
        c.classifier.min_sigma_z_truck =
            get_number(cl, "min_sigma_z_truck", c.classifier.min_sigma_z_truck);
        c.classifier.min_length_long = get_number(cl, "min_length_long", c.classifier.min_length_long);
        if (cl.contains("min_hmax_truck")) {
            c.classifier.min_hmax_truck = get_number(cl, "min_hmax_truck", 0.0);
        } else if (cl.contains("ground_z")) {
            // Site-relative default: roof must clear ground level + 2.5 m.
            c.classifier.min_hmax_truck = get_number(cl, "ground_z", 0.0) + 2.5;
        }
    }

    if (j.contains("tracker")) {
        const auto& t = j.at("tracker");
        reject_unknown_keys(t,
                            {"sensor_position", "stop_line_position", "min_speed", "gate_radius",
                             "max_missed", "min_hits"},
                            "tracker");
        c.tracker.sensor_position = get_point(t, "sensor_position", c.tracker.sensor_position);
        c.tracker.stop_line_position =
            get_point(t, "stop_line_position", c.tracker.stop_line_position);
        c.tracker.min_speed = get_number(t, "min_speed", c.tracker.min_speed);
        c.tracker.gate_radius = get_number(t, "gate_radius", c.tracker.gate_radius);
        c.tracker.max_missed = get_int(t, "max_missed", c.tracker.max_missed);
        c.tracker.min_hits = get_int(t, "min_hits", c.tracker.min_hits);
    }

    if (j.contains("noise")) {
        const auto& n = j.at("noise");
        reject_unknown_keys(n, {"q_pos", "q_vel", "r_sigma"}, "noise");
        c.noise.q_pos = get_number(n, "q_pos", c.noise.q_pos);
        c.noise.q_vel = get_number(n, "q_vel", c.noise.q_vel);
        c.noise.r_sigma = get_number(n, "r_sigma", c.noise.r_sigma);
    }

    if (j.contains("extrinsic_path") && !j.at("extrinsic_path").is_null()) {
        c.extrinsic_path = j.at("extrinsic_path").get<std::string>();
    }
    c.frame_rate_hz = get_number(j, "frame_rate_hz", c.frame_rate_hz);
    c.request_horizon_s = get_number(j, "request_horizon_s", c.request_horizon_s);
    c.request_cooldown_s = get_number(j, "request_cooldown_s", c.request_cooldown_s);

    validate(c);
    return c;
}

PipelineConfig load_config(const std::string& path) {
    return config_from_json_text(read_text_file(path));
}

std::string config_to_json_text(const PipelineConfig& c) {
    nlohmann::ordered_json j;
    j["site_id"] = c.site_id;
    j["tilt"] = {{"roll_phi", c.tilt.roll_phi}, {"pitch_theta", c.tilt.pitch_theta}};
    nlohmann::ordered_json poly = nlohmann::ordered_json::array();
    for (const auto& v : c.roi.polygon_xy) poly.push_back({v[0], v[1]});
    j["roi"] = {{"polygon_xy", poly}, {"z_min", c.roi.z_min}, {"z_max", c.roi.z_max}};
    j["voxel"] = {{"size", c.voxel.voxel_size_sv}};
    j["foreground"] = {{"alpha", c.foreground.alpha},
                       {"clamp_tau", c.foreground.clamp_tau},
                       {"tau_min", c.foreground.tau_min},
                       {"tau_max", c.foreground.tau_max}};
    j["background"] = {{"dedup_voxel", c.background.dedup_voxel}};
    j["dbscan"] = {{"epsilon", c.dbscan.epsilon}, {"min_pts", c.dbscan.min_pts}};
    j["classifier"] = {{"min_abs_height_truck", c.classifier.min_abs_height_truck},
                       {"min_hmax_truck", c.classifier.min_hmax_truck},
                       {"min_sigma_z_truck", c.classifier.min_sigma_z_truck},
                       {"min_length_long", c.classifier.min_length_long}};
    j["tracker"] = {
        {"sensor_position",
         {c.tracker.sensor_position.x, c.tracker.sensor_position.y, c.tracker.sensor_position.z}},
        {"stop_line_position",
         {c.tracker.stop_line_position.x, c.tracker.stop_line_position.y,
          c.tracker.stop_line_position.z}},
        {"min_speed", c.tracker.min_speed},
        {"gate_radius", c.tracker.gate_radius},
        {"max_missed", c.tracker.max_missed},
        {"min_hits", c.tracker.min_hits}};
    j["noise"] = {{"q_pos", c.noise.q_pos}, {"q_vel", c.noise.q_vel}, {"r_sigma", c.noise.r_sigma}};
    if (c.extrinsic_path) {
        j["extrinsic_path"] = *c.extrinsic_path;
    } else {
        j["extrinsic_path"] = nullptr;
    }
    j["frame_rate_hz"] = c.frame_rate_hz;
    j["request_horizon_s"] = c.request_horizon_s;
    j["request_cooldown_s"] = c.request_cooldown_s;
    return j.dump(2) + "\n";
}

}  // namespace fsp
