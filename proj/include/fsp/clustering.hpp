#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fsp/types.hpp"

namespace fsp {

struct DbscanParams {
    double epsilon = 1.2;  // meters, > 0; neighborhood boundary is inclusive
    int min_pts = 8;       // >= 1; the neighborhood count includes the point itself
};

enum class VehicleClass { LongTruck, CompactTruck, NonTruck };

const char* to_string(VehicleClass c);
VehicleClass vehicle_class_from_string(const std::string& s);

/// DBSCAN-grouped point set with centroid and height statistics plus the
/// class label assigned downstream.
struct Cluster {
    std::int64_t cluster_id = 0;
    std::vector<Point3> points;
    Point3 centroid;
    double hmax = 0.0;        // max z over members
    double sigma_z = 0.0;     // population std of member z
    double abs_height = 0.0;  // max z - min z
    double length_xy = 0.0;   // longer side of the x-y bounding box
    double width_xy = 0.0;    // shorter side
    VehicleClass label = VehicleClass::NonTruck;
};

struct DbscanResult {
    // Each cluster is an ascending list of indices into the input points.
    // Clusters are ordered by discovery (first core point in input order),
    // so the labeling is deterministic for a given input order.
    std::vector<std::vector<std::size_t>> clusters;
    std::vector<std::size_t> noise;
};

/// Density clustering. A point is core iff its inclusive epsilon-neighborhood
/// holds at least min_pts points (itself included); clusters are maximal
/// density-connected sets, border points go to the first cluster that
/// reaches them, isolated points become noise.
DbscanResult dbscan(const std::vector<Point3>& points, const DbscanParams& params);

/// Centroid, hmax, sigma_z, abs_height and x-y extent of a point set.
/// Throws InvalidParameterError on an empty list.
Cluster cluster_features(const std::vector<Point3>& points);

struct ClassifierThresholds {
    double min_abs_height_truck = 2.5;  // meters
    double min_hmax_truck = 2.5;        // meters, sensor-relative (site ground_z + 2.5 by default)
    double min_sigma_z_truck = 0.5;     // meters
    double min_length_long = 9.0;       // meters, Long vs Compact split
};

/// Transparent AND-gate rule: a cluster is a truck when abs_height, hmax and
/// sigma_z all clear their thresholds; trucks split into Long vs Compact on
/// x-y length.
VehicleClass classify_vehicle(const Cluster& cluster, const ClassifierThresholds& thresholds);

}  // namespace fsp
