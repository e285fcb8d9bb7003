#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fsp/kdtree.hpp"
#include "fsp/types.hpp"

namespace fsp {

/// Merged static-scene point set with a spatial index for nearest-distance
/// queries. Immutable after build; safe to share across threads for reads.
class BackgroundMap {
public:
    /// Merge leveled, identically-cropped frames into one map. Points are
    /// voxel-deduplicated at dedup_voxel (one centroid per occupied cell).
    /// Throws InvalidParameterError on an empty frame list or bad voxel size.
    static BackgroundMap build(const std::vector<PointCloudFrame>& frames, double dedup_voxel);

    /// Rebuild from previously persisted points (used by load_background).
    static BackgroundMap from_points(std::vector<Point3> points, double dedup_voxel,
                                     std::vector<std::int64_t> source_frame_ids);

    const std::vector<Point3>& points() const { return index_.points(); }
    double dedup_voxel() const { return dedup_voxel_; }
    const std::vector<std::int64_t>& source_frame_ids() const { return source_frame_ids_; }
    const KdTree3& index() const { return index_; }
    std::size_t size() const { return index_.size(); }

    /// Exact Euclidean distance to the nearest background point.
    double nearest_distance(const Point3& p) const { return index_.nearest(p).distance; }

private:
    BackgroundMap() = default;
    KdTree3 index_;
    double dedup_voxel_ = 0.1;
    std::vector<std::int64_t> source_frame_ids_;
};

/// d_i = min over background points b of ||p - b||.
inline double nearest_background_distance(const Point3& p, const BackgroundMap& map) {
    return map.nearest_distance(p);
}

struct ForegroundParams {
    double alpha = 2.0;  // sensitivity, > 0
    // Optional absolute clamp on the adaptive threshold. Off by default, which
    // reproduces the plain tau = mu_d + alpha * sigma_d rule.
    bool clamp_tau = false;
    double tau_min = 0.2;
    double tau_max = 2.0;
};

struct ForegroundResult {
    PointCloudFrame foreground;
    // Per-frame diagnostics over the nearest-background distances {d_i}.
    double mu_d = 0.0;
    double sigma_d = 0.0;  // population standard deviation
    double tau = 0.0;
    std::size_t input_count = 0;
};

/// Keep the points whose nearest-background distance strictly exceeds the
/// adaptive threshold tau = mu_d + alpha * sigma_d, computed over this frame.
/// Input order is preserved. An empty frame yields an empty foreground.
ForegroundResult extract_foreground(const PointCloudFrame& frame, const BackgroundMap& map,
                                    const ForegroundParams& params);

/// Persist as a frame-format file plus a `<path>.meta.json` sidecar holding
/// {dedup_voxel, source_frame_ids, created_at}.
void save_background(const BackgroundMap& map, const std::string& path);
BackgroundMap load_background(const std::string& path);

}  // namespace fsp
