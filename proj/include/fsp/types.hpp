#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace fsp {

// ---------------------------------------------------------------------------
// Error taxonomy. Every throwing operation in the library uses one of these.
// ---------------------------------------------------------------------------

struct InvalidParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Operation called on an object in the wrong state (e.g. frame tag mismatch).
struct StateError : std::logic_error {
    using std::logic_error::logic_error;
};

/// Input geometry cannot constrain the requested solution.
struct DegenerateGeometryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InsufficientDataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Core geometry
// ---------------------------------------------------------------------------

struct Point3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

inline Point3 operator+(const Point3& a, const Point3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Point3 operator-(const Point3& a, const Point3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Point3 operator*(const Point3& a, double s) { return {a.x * s, a.y * s, a.z * s}; }

inline double dot(const Point3& a, const Point3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline double squared_distance(const Point3& a, const Point3& b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    const double dz = a.z - b.z;
    return dx * dx + dy * dy + dz * dz;
}

inline double distance(const Point3& a, const Point3& b) { return std::sqrt(squared_distance(a, b)); }

inline double horizontal_distance(const Point3& a, const Point3& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

inline double norm(const Point3& a) { return std::sqrt(dot(a, a)); }

inline bool is_finite(const Point3& p) {
    return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z);
}

// ---------------------------------------------------------------------------
// Frames
// ---------------------------------------------------------------------------

/// Coordinate frame a point cloud currently lives in. Transitions are one-way:
/// SensorFrame -> LeveledFrame -> EnuFrame.
enum class FrameTag { SensorFrame, LeveledFrame, EnuFrame };

/// Timestamped set of 3-D points; the unit of pipeline work.
/// Timestamps must strictly increase with frame_id within a stream.
struct PointCloudFrame {
    std::int64_t frame_id = 0;
    double timestamp = 0.0;  // seconds since epoch, fractional
    FrameTag tag = FrameTag::SensorFrame;
    std::vector<Point3> points;
};

}  // namespace fsp
