#include "fsp/geodesy.hpp"

#include <cmath>

namespace fsp {

namespace {

constexpr long double kA = 6378137.0L;
constexpr long double kF = 1.0L / 298.257223563L;
constexpr long double kE2 = kF * (2.0L - kF);
constexpr long double kB = kA * (1.0L - kF);
constexpr long double kDegToRad = 0.017453292519943295769236907684886L;

struct Ecef {
    long double x, y, z;
};

void validate(const GeodeticCoord& g) {
    if (!(std::abs(g.latitude_deg) <= 90.0) || !(std::abs(g.longitude_deg) <= 180.0) ||
        !std::isfinite(g.altitude_m)) {
        throw InvalidParameterError("geodetic coordinate out of range");
    }
}

Ecef geodetic_to_ecef(const GeodeticCoord& g) {
    const long double lat = static_cast<long double>(g.latitude_deg) * kDegToRad;
    const long double lon = static_cast<long double>(g.longitude_deg) * kDegToRad;
    const long double h = g.altitude_m;
    const long double sl = sinl(lat), cl = cosl(lat);
    const long double n = kA / sqrtl(1.0L - kE2 * sl * sl);
    return {(n + h) * cl * cosl(lon), (n + h) * cl * sinl(lon), (n * (1.0L - kE2) + h) * sl};
}

GeodeticCoord ecef_to_geodetic(const Ecef& c) {
    const long double p = hypotl(c.x, c.y);
    GeodeticCoord out;
    out.longitude_deg = static_cast<double>(atan2l(c.y, c.x) / kDegToRad);

    if (p < 1e-9L) {  // polar axis
        out.latitude_deg = c.z >= 0 ? 90.0 : -90.0;
        out.altitude_m = static_cast<double>(fabsl(c.z) - kB);
        return out;
    }

    // Fixed-point iteration on latitude/height; converges to the extended-
    // precision limit in a handful of steps for terrestrial points.
    long double lat = atan2l(c.z, p * (1.0L - kE2));
    long double h = 0.0L;
    for (int i = 0; i < 30; ++i) {
        const long double sl = sinl(lat);
        const long double n = kA / sqrtl(1.0L - kE2 * sl * sl);
        const long double h_new = p / cosl(lat) - n;
        const long double lat_new = atan2l(c.z, p * (1.0L - kE2 * n / (n + h_new)));
        const long double dlat = fabsl(lat_new - lat);
        lat = lat_new;
        h = h_new;
        if (dlat < 1e-18L) break;
    }
    out.latitude_deg = static_cast<double>(lat / kDegToRad);
    out.altitude_m = static_cast<double>(h);
    return out;
}

}  // namespace

EnuCoord geodetic_to_enu(const GeodeticCoord& g, const EnuReference& ref) {
    validate(g);
    validate(ref.origin);
    const Ecef pt = geodetic_to_ecef(g);
    const Ecef org = geodetic_to_ecef(ref.origin);
    const long double dx = pt.x - org.x;
    const long double dy = pt.y - org.y;
    const long double dz = pt.z - org.z;

    const long double lat = static_cast<long double>(ref.origin.latitude_deg) * kDegToRad;
    const long double lon = static_cast<long double>(ref.origin.longitude_deg) * kDegToRad;
    const long double sl = sinl(lat), cl = cosl(lat);
    const long double so = sinl(lon), co = cosl(lon);

    EnuCoord out;
    out.east = static_cast<double>(-so * dx + co * dy);
    out.north = static_cast<double>(-sl * co * dx - sl * so * dy + cl * dz);
    out.up = static_cast<double>(cl * co * dx + cl * so * dy + sl * dz);
    return out;
}

GeodeticCoord enu_to_geodetic(const EnuCoord& e, const EnuReference& ref) {
    validate(ref.origin);
    const Ecef org = geodetic_to_ecef(ref.origin);
    const long double lat = static_cast<long double>(ref.origin.latitude_deg) * kDegToRad;
    const long double lon = static_cast<long double>(ref.origin.longitude_deg) * kDegToRad;
    const long double sl = sinl(lat), cl = cosl(lat);
    const long double so = sinl(lon), co = cosl(lon);

    const long double le = e.east, ln = e.north, lu = e.up;
    Ecef c;
    c.x = org.x + (-so * le - sl * co * ln + cl * co * lu);
    c.y = org.y + (co * le - sl * so * ln + cl * so * lu);
    c.z = org.z + (cl * ln + sl * lu);
    return ecef_to_geodetic(c);
}

double geodetic_distance_m(const GeodeticCoord& a, const GeodeticCoord& b) {
    const EnuCoord d = geodetic_to_enu(b, EnuReference{a});
    return std::sqrt(d.east * d.east + d.north * d.north + d.up * d.up);
}

}  // namespace fsp
