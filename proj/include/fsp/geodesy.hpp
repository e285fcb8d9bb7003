#pragma once

#include "fsp/types.hpp"

namespace fsp {

/// WGS-84 geodetic position. Latitude/longitude in degrees, ellipsoidal
/// height in meters.
struct GeodeticCoord {
    double latitude_deg = 0.0;
    double longitude_deg = 0.0;
    double altitude_m = 0.0;
};

/// Origin of a local East-North-Up tangent frame.
struct EnuReference {
    GeodeticCoord origin;
};

struct EnuCoord {
    double east = 0.0;
    double north = 0.0;
    double up = 0.0;
};

inline Point3 to_point(const EnuCoord& e) { return {e.east, e.north, e.up}; }
inline EnuCoord to_enu(const Point3& p) { return {p.x, p.y, p.z}; }

namespace wgs84 {
inline constexpr double kSemiMajorAxis = 6378137.0;
inline constexpr double kFlattening = 1.0 / 298.257223563;
inline constexpr double kEccentricitySq = kFlattening * (2.0 - kFlattening);
}  // namespace wgs84

/// Exact ellipsoidal geodetic -> ECEF -> local-tangent-plane ENU at ref.
/// Intermediate arithmetic runs in extended precision so that a round trip
/// through enu_to_geodetic stays below 1e-9 m within ~10 km of the reference.
/// Throws InvalidParameterError when |lat| > 90 or |lon| > 180.
EnuCoord geodetic_to_enu(const GeodeticCoord& g, const EnuReference& ref);

/// Inverse of geodetic_to_enu at the same reference.
GeodeticCoord enu_to_geodetic(const EnuCoord& e, const EnuReference& ref);

/// Metric separation between two geodetic positions, measured through the
/// ENU frame anchored at `a`. Convenience for tests and reports.
double geodetic_distance_m(const GeodeticCoord& a, const GeodeticCoord& b);

}  // namespace fsp
