#include "fsp/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "fsp/kdtree.hpp"

namespace fsp {

const char* to_string(VehicleClass c) {
    switch (c) {
        case VehicleClass::LongTruck: return "LongTruck";
        case VehicleClass::CompactTruck: return "CompactTruck";
        default: return "NonTruck";
    }
}

VehicleClass vehicle_class_from_string(const std::string& s) {
    if (s == "LongTruck") return VehicleClass::LongTruck;
    if (s == "CompactTruck") return VehicleClass::CompactTruck;
    if (s == "NonTruck") return VehicleClass::NonTruck;
    throw InvalidParameterError("unknown vehicle class '" + s + "'");
}

DbscanResult dbscan(const std::vector<Point3>& points, const DbscanParams& params) {
    if (!(params.epsilon > 0.0)) throw InvalidParameterError("dbscan epsilon must be > 0");
    if (params.min_pts < 1) throw InvalidParameterError("dbscan min_pts must be >= 1");

    const std::size_t n = points.size();
    DbscanResult result;
    if (n == 0) return result;

    const KdTree3 tree(points);

    constexpr int kUnvisited = -2;
    constexpr int kNoise = -1;
    std::vector<int> label(n, kUnvisited);

    std::vector<std::size_t> neighbors;
    std::deque<std::size_t> frontier;
    const std::size_t min_pts = static_cast<std::size_t>(params.min_pts);

    int next_cluster = 0;
    for (std::size_t seed = 0; seed < n; ++seed) {
        if (label[seed] != kUnvisited) continue;
        tree.radius_indices(points[seed], params.epsilon, neighbors);
        if (neighbors.size() < min_pts) {
            label[seed] = kNoise;  // may still be claimed as a border point later
            continue;
        }
        const int cid = next_cluster++;
        label[seed] = cid;
        frontier.assign(neighbors.begin(), neighbors.end());
        while (!frontier.empty()) {
            const std::size_t j = frontier.front();
            frontier.pop_front();
            if (label[j] == kNoise) {
                label[j] = cid;  // border point
                continue;
            }
            if (label[j] != kUnvisited) continue;
            label[j] = cid;
            tree.radius_indices(points[j], params.epsilon, neighbors);
            if (neighbors.size() >= min_pts) {
                frontier.insert(frontier.end(), neighbors.begin(), neighbors.end());
            }
        }
    }

    result.clusters.resize(static_cast<std::size_t>(next_cluster));
    for (std::size_t i = 0; i < n; ++i) {
        if (label[i] == kNoise) {
            result.noise.push_back(i);
        } else {
            result.clusters[static_cast<std::size_t>(label[i])].push_back(i);
        }
    }
    return result;
}

Cluster cluster_features(const std::vector<Point3>& points) {
    if (points.empty()) throw InvalidParameterError("cluster_features on empty point list");

    Cluster c;
    c.points = points;
    double sx = 0, sy = 0, sz = 0;
    double min_x = std::numeric_limits<double>::infinity(), max_x = -min_x;
    double min_y = min_x, max_y = -min_x;
    double min_z = min_x, max_z = -min_x;
    for (const Point3& p : points) {
        sx += p.x;
        sy += p.y;
        sz += p.z;
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
        min_z = std::min(min_z, p.z);
        max_z = std::max(max_z, p.z);
    }
    const double n = static_cast<double>(points.size());
    c.centroid = {sx / n, sy / n, sz / n};
    c.hmax = max_z;
    c.abs_height = max_z - min_z;

    double var_z = 0;
    for (const Point3& p : points) var_z += (p.z - c.centroid.z) * (p.z - c.centroid.z);
    c.sigma_z = std::sqrt(var_z / n);

    const double dx = max_x - min_x;
    const double dy = max_y - min_y;
    c.length_xy = std::max(dx, dy);
    c.width_xy = std::min(dx, dy);
    return c;
}

VehicleClass classify_vehicle(const Cluster& cluster, const ClassifierThresholds& thresholds) {
    const bool truck = cluster.abs_height >= thresholds.min_abs_height_truck &&
                       cluster.hmax >= thresholds.min_hmax_truck &&
                       cluster.sigma_z >= thresholds.min_sigma_z_truck;
    if (!truck) return VehicleClass::NonTruck;
    return cluster.length_xy >= thresholds.min_length_long ? VehicleClass::LongTruck
                                                           : VehicleClass::CompactTruck;
}

}  // namespace fsp
