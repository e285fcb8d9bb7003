#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fsp/evaluation.hpp"
#include "fsp/geodesy.hpp"
#include "fsp/types.hpp"

namespace fsp {

/// Frame replay file: first line `# frame_id=<int> timestamp=<float>`, then
/// one `x y z` triple per line (decimal, meters). Throws IoError on malformed
/// content (including non-finite coordinates).
PointCloudFrame read_frame_file(const std::string& path);

/// Writes the same format with fixed 6-decimal coordinates.
void write_frame_file(const PointCloudFrame& frame, const std::string& path);

/// Paths of the regular files in `dir`, ordered by the frame_id read from each
/// file's header. Throws IoError when the directory is missing or a header is
/// unreadable.
std::vector<std::string> list_frame_files(const std::string& dir);

/// Static calibration pairs, one `lidar_x,lidar_y,lidar_z,lat,lon,alt` per line.
struct RawCorrespondence {
    Point3 lidar;
    GeodeticCoord geodetic;
};
std::vector<RawCorrespondence> read_correspondence_csv(const std::string& path);

/// GPS trajectory: `timestamp,lat,lon,alt` per line.
std::vector<std::pair<double, GeodeticCoord>> read_gps_trajectory_csv(const std::string& path);

/// LiDAR trajectory (tracked centroid in the sensor frame): `timestamp,x,y,z`.
std::vector<std::pair<double, Point3>> read_lidar_trajectory_csv(const std::string& path);

/// Timing log with header `frame_id,foreground_points,processing_seconds`.
std::vector<TimingSample> read_timing_csv(const std::string& path);

// Small shared helpers.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);
std::string iso8601_utc_now();

}  // namespace fsp
