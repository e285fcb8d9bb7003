#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fsp/clustering.hpp"
#include "fsp/types.hpp"

namespace fsp {

/// One annotated scenario frame with a single primary target.
struct ScenarioAnnotation {
    std::string scenario_id;
    std::string frame_file;
    std::optional<std::int64_t> frame_id;  // optional; else derived from frame_file
    VehicleClass gt_class = VehicleClass::NonTruck;
    Point3 gt_position;  // leveled frame
    std::string note;
};

struct MatchThresholds {
    double long_truck_m = 10.0;
    double compact_truck_m = 4.0;
};

enum class MatchOutcome { TP, FP, FN, TN };

const char* to_string(MatchOutcome o);

struct LabeledDetection {
    VehicleClass cls = VehicleClass::NonTruck;
    Point3 position;
};

/// Frame-level priority-trigger outcome. Truck ground truth matches the
/// nearest predicted truck within the class-specific threshold (class-
/// agnostic beyond the distance, non-truck predictions ignored); non-truck
/// ground truth counts FP when any predicted truck exists in the frame.
MatchOutcome match_frame(const ScenarioAnnotation& gt,
                         const std::vector<LabeledDetection>& predictions,
                         const MatchThresholds& thresholds);

struct ConfusionCounts {
    int tp = 0;
    int fp = 0;
    int fn = 0;
    int tn = 0;
    void add(MatchOutcome o);
    int total() const { return tp + fp + fn + tn; }
};

/// Precision/recall/F1; a zero denominator leaves the metric undefined
/// (nullopt) rather than silently reporting 0.
struct MetricsReport {
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f1;
};

MetricsReport compute_metrics(const ConfusionCounts& counts);

struct TimingSample {
    std::int64_t frame_id = 0;
    std::int64_t foreground_point_count = 0;
    double processing_seconds = 0.0;  // > 0
};

struct ProfileReport {
    std::size_t sample_count = 0;
    double budget_seconds = 0.0;
    double mean_seconds = 0.0;
    double max_seconds = 0.0;
    double p99_seconds = 0.0;
    double over_budget_fraction = 0.0;
    // Pearson correlation of foreground point count vs processing time;
    // undefined when either side has zero variance.
    std::optional<double> count_time_correlation;
};

/// Throws InsufficientDataError on an empty sample list.
ProfileReport profile_report(const std::vector<TimingSample>& samples, double budget_seconds);

}  // namespace fsp
