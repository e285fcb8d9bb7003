#include "fsp/registration.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "fsp/frame_io.hpp"

namespace fsp {

namespace {

ErrorReport summarize(std::vector<double> per_point) {
    ErrorReport r;
    r.per_point = std::move(per_point);
    for (double e : r.per_point) {
        r.mean += e;
        r.max = std::max(r.max, e);
    }
    if (!r.per_point.empty()) r.mean /= static_cast<double>(r.per_point.size());
    return r;
}

}  // namespace

EnuCoord apply_extrinsic(const RigidTransform3D& tf, const Point3& p) {
    const Eigen::Vector3d v = tf.R * Eigen::Vector3d(p.x, p.y, p.z) + tf.t;
    return {v.x(), v.y(), v.z()};
}

RigidTransform3D invert(const RigidTransform3D& tf) {
    RigidTransform3D inv;
    inv.R = tf.R.transpose();
    inv.t = -(inv.R * tf.t);
    return inv;
}

Eigen::Matrix3d yaw_rotation(double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    Eigen::Matrix3d r;
    r << c, -s, 0,
         s, c, 0,
         0, 0, 1;
    return r;
}

StaticRegistrationResult estimate_static_extrinsic(const CorrespondenceSet& correspondences) {
    const auto& pairs = correspondences.pairs;
    const std::size_t n = pairs.size();
    if (n < 3) {
        throw DegenerateGeometryError("static registration needs at least 3 point pairs, got " +
                                      std::to_string(n));
    }

    Eigen::Vector3d c_lidar = Eigen::Vector3d::Zero();
    Eigen::Vector3d c_enu = Eigen::Vector3d::Zero();
    for (const Correspondence& c : pairs) {
        c_lidar += Eigen::Vector3d(c.lidar.x, c.lidar.y, c.lidar.z);
        c_enu += Eigen::Vector3d(c.enu.east, c.enu.north, c.enu.up);
    }
    c_lidar /= static_cast<double>(n);
    c_enu /= static_cast<double>(n);

    Eigen::Matrix3d cross_cov = Eigen::Matrix3d::Zero();
    Eigen::MatrixXd centered(3, static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const Eigen::Vector3d l =
            Eigen::Vector3d(pairs[i].lidar.x, pairs[i].lidar.y, pairs[i].lidar.z) - c_lidar;
        const Eigen::Vector3d e =
            Eigen::Vector3d(pairs[i].enu.east, pairs[i].enu.north, pairs[i].enu.up) - c_enu;
        cross_cov += l * e.transpose();
        centered.col(static_cast<Eigen::Index>(i)) = l;
    }

    // Collinear LiDAR points leave the rotation about that line unconstrained.
    const Eigen::JacobiSVD<Eigen::MatrixXd> geom_svd(centered);
    const auto sv = geom_svd.singularValues();
    const double ratio = sv(0) > 0.0 ? sv(1) / sv(0) : 0.0;
    if (ratio < 1e-6) {
        throw DegenerateGeometryError(
            "correspondence LiDAR points are collinear (singular-value ratio " +
            std::to_string(ratio) + "); spread the reference targets out");
    }

    Eigen::JacobiSVD<Eigen::Matrix3d> svd(cross_cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
    d(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0 ? -1.0 : 1.0;

    StaticRegistrationResult result;
    result.transform.R = svd.matrixV() * d * svd.matrixU().transpose();
    result.transform.t = c_enu - result.transform.R * c_lidar;
    result.collinearity_ratio = ratio;
    result.near_collinear = ratio < 1e-2;
    result.residuals = static_registration_error(correspondences, result.transform);
    return result;
}

std::vector<TrajectorySample> resample_by_arclength(const std::vector<Point3>& trajectory,
                                                    double spacing) {
    if (!(spacing > 0.0)) throw InvalidParameterError("resample spacing must be > 0");

    std::vector<Point3> pts;
    pts.reserve(trajectory.size());
    for (const Point3& p : trajectory) {
        if (pts.empty() || squared_distance(pts.back(), p) > 0.0) pts.push_back(p);
    }
    if (pts.size() < 2) {
        throw DegenerateGeometryError("trajectory has fewer than 2 distinct points");
    }

    std::vector<double> cum(pts.size(), 0.0);
    for (std::size_t i = 1; i < pts.size(); ++i) {
        cum[i] = cum[i - 1] + distance(pts[i - 1], pts[i]);
    }
    const double total = cum.back();

    std::vector<TrajectorySample> samples;
    const std::size_t n_grid = static_cast<std::size_t>(std::floor(total / spacing + 1e-12));
    samples.reserve(n_grid + 2);
    std::size_t seg = 0;
    auto at_arclength = [&](double s) -> Point3 {
        while (seg + 1 < cum.size() - 1 && cum[seg + 1] < s) ++seg;
        const double seg_len = cum[seg + 1] - cum[seg];
        const double u = seg_len > 0.0 ? (s - cum[seg]) / seg_len : 0.0;
        return pts[seg] + (pts[seg + 1] - pts[seg]) * u;
    };
    for (std::size_t i = 0; i <= n_grid; ++i) {
        const double s = std::min(static_cast<double>(i) * spacing, total);
        samples.push_back({at_arclength(s), s});
    }
    if (total - static_cast<double>(n_grid) * spacing > 1e-9) {
        samples.push_back({pts.back(), total});
    }
    return samples;
}

PlanarRefinement refine_planar_and_vertical(const std::vector<TrajectoryPair>& trajectories) {
    // Stack index-wise pairs from every trajectory into one problem.
    std::vector<Eigen::Vector2d> lidar_xy, gps_xy;
    double sum_z_lidar = 0.0, sum_z_gps = 0.0;
    for (const TrajectoryPair& tp : trajectories) {
        const std::size_t n = std::min(tp.lidar_enu.size(), tp.gps_enu.size());
        for (std::size_t i = 0; i < n; ++i) {
            const Point3& l = tp.lidar_enu[i].position;
            const Point3& g = tp.gps_enu[i].position;
            lidar_xy.emplace_back(l.x, l.y);
            gps_xy.emplace_back(g.x, g.y);
            sum_z_lidar += l.z;
            sum_z_gps += g.z;
        }
    }
    const std::size_t n = lidar_xy.size();
    if (n < 3) {
        throw InsufficientDataError("planar refinement needs at least 3 paired samples, got " +
                                    std::to_string(n));
    }

    Eigen::Vector2d cl = Eigen::Vector2d::Zero(), cg = Eigen::Vector2d::Zero();
    for (std::size_t i = 0; i < n; ++i) {
        cl += lidar_xy[i];
        cg += gps_xy[i];
    }
    cl /= static_cast<double>(n);
    cg /= static_cast<double>(n);

    Eigen::Matrix2d h = Eigen::Matrix2d::Zero();
    for (std::size_t i = 0; i < n; ++i) {
        h += (lidar_xy[i] - cl) * (gps_xy[i] - cg).transpose();
    }
    Eigen::JacobiSVD<Eigen::Matrix2d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix2d d = Eigen::Matrix2d::Identity();
    d(1, 1) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0 ? -1.0 : 1.0;
    const Eigen::Matrix2d rz = svd.matrixV() * d * svd.matrixU().transpose();

    PlanarRefinement refine;
    refine.theta_yaw = std::atan2(rz(1, 0), rz(0, 0));
    refine.t_xy = cg - rz * cl;
    refine.delta_z = (sum_z_gps - sum_z_lidar) / static_cast<double>(n);
    return refine;
}

PlanarRefinement refine_planar_and_vertical(const std::vector<TrajectorySample>& lidar_enu,
                                            const std::vector<TrajectorySample>& gps_enu) {
    return refine_planar_and_vertical(std::vector<TrajectoryPair>{{lidar_enu, gps_enu}});
}

RigidTransform3D compose_final(const RigidTransform3D& initial, const PlanarRefinement& refine) {
    const Eigen::Matrix3d rz = yaw_rotation(refine.theta_yaw);
    RigidTransform3D out;
    out.R = rz * initial.R;
    out.t = rz * initial.t +
            Eigen::Vector3d(refine.t_xy.x(), refine.t_xy.y(), refine.delta_z);
    return out;
}

ErrorReport static_registration_error(const CorrespondenceSet& correspondences,
                                      const RigidTransform3D& tf) {
    std::vector<double> errors;
    errors.reserve(correspondences.pairs.size());
    for (const Correspondence& c : correspondences.pairs) {
        const EnuCoord mapped = apply_extrinsic(tf, c.lidar);
        const double dx = mapped.east - c.enu.east;
        const double dy = mapped.north - c.enu.north;
        const double dz = mapped.up - c.enu.up;
        errors.push_back(std::sqrt(dx * dx + dy * dy + dz * dz));
    }
    return summarize(std::move(errors));
}

ErrorReport trajectory_alignment_error(const std::vector<TrajectorySample>& lidar_enu,
                                       const std::vector<TrajectorySample>& gps_enu) {
    const std::size_t n = std::min(lidar_enu.size(), gps_enu.size());
    if (n == 0) {
        throw InsufficientDataError("no paired samples for trajectory alignment error");
    }
    std::vector<double> errors;
    errors.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        errors.push_back(std::hypot(lidar_enu[i].position.x - gps_enu[i].position.x,
                                    lidar_enu[i].position.y - gps_enu[i].position.y));
    }
    return summarize(std::move(errors));
}

void save_calibration(const CalibrationArtifact& artifact, const std::string& path) {
    nlohmann::ordered_json j;
    j["enu_reference"] = {{"lat", artifact.enu_reference.origin.latitude_deg},
                          {"lon", artifact.enu_reference.origin.longitude_deg},
                          {"alt", artifact.enu_reference.origin.altitude_m}};
    std::vector<double> r(9);
    for (int row = 0; row < 3; ++row) {
        for (int col = 0; col < 3; ++col) r[static_cast<std::size_t>(row * 3 + col)] = artifact.transform.R(row, col);
    }
    j["R"] = r;
    j["t"] = {artifact.transform.t.x(), artifact.transform.t.y(), artifact.transform.t.z()};
    j["static_error"] = {{"mean", artifact.static_error_mean}, {"max", artifact.static_error_max}};
    if (artifact.trajectory_error_mean.has_value()) {
        j["trajectory_error"] = {{"mean", *artifact.trajectory_error_mean},
                                 {"max", *artifact.trajectory_error_max}};
    } else {
        j["trajectory_error"] = nullptr;
    }
    j["created_at"] = artifact.created_at.empty() ? iso8601_utc_now() : artifact.created_at;
    write_text_file(path, j.dump(2) + "\n");
}

CalibrationArtifact load_calibration(const std::string& path) {
    CalibrationArtifact a;
    try {
        const auto j = nlohmann::json::parse(read_text_file(path));
        a.enu_reference.origin = {j.at("enu_reference").at("lat").get<double>(),
                                  j.at("enu_reference").at("lon").get<double>(),
                                  j.at("enu_reference").at("alt").get<double>()};
        const auto r = j.at("R").get<std::vector<double>>();
        if (r.size() != 9) throw IoError("extrinsic R must have 9 entries in " + path);
        for (int row = 0; row < 3; ++row) {
            for (int col = 0; col < 3; ++col) a.transform.R(row, col) = r[static_cast<std::size_t>(row * 3 + col)];
        }
        const auto t = j.at("t").get<std::vector<double>>();
        if (t.size() != 3) throw IoError("extrinsic t must have 3 entries in " + path);
        a.transform.t = Eigen::Vector3d(t[0], t[1], t[2]);
        a.static_error_mean = j.at("static_error").at("mean").get<double>();
        a.static_error_max = j.at("static_error").at("max").get<double>();
        if (j.contains("trajectory_error") && !j.at("trajectory_error").is_null()) {
            a.trajectory_error_mean = j.at("trajectory_error").at("mean").get<double>();
            a.trajectory_error_max = j.at("trajectory_error").at("max").get<double>();
        }
        if (j.contains("created_at") && j.at("created_at").is_string()) {
            a.created_at = j.at("created_at").get<std::string>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw IoError("invalid calibration artifact " + path + ": " + e.what());
    }
    const Eigen::Matrix3d err = a.transform.R.transpose() * a.transform.R -
                                Eigen::Matrix3d::Identity();
    if (err.cwiseAbs().maxCoeff() > 1e-6 || std::abs(a.transform.R.determinant() - 1.0) > 1e-6) {
        throw IoError("extrinsic rotation in " + path + " is not a proper rotation");
    }
    return a;
}

}  // namespace fsp
