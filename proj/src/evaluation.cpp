#include "fsp/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fsp {

const char* to_string(MatchOutcome o) {
    switch (o) {
        case MatchOutcome::TP: return "TP";
        case MatchOutcome::FP: return "FP";
        case MatchOutcome::FN: return "FN";
        default: return "TN";
    }
}

MatchOutcome match_frame(const ScenarioAnnotation& gt,
                         const std::vector<LabeledDetection>& predictions,
                         const MatchThresholds& thresholds) {
    const bool gt_truck = gt.gt_class != VehicleClass::NonTruck;

    if (!gt_truck) {
        for (const LabeledDetection& d : predictions) {
            if (d.cls != VehicleClass::NonTruck) return MatchOutcome::FP;
        }
        return MatchOutcome::TN;
    }

    const double threshold = gt.gt_class == VehicleClass::LongTruck ? thresholds.long_truck_m
                                                                    : thresholds.compact_truck_m;
    double nearest = std::numeric_limits<double>::infinity();
    for (const LabeledDetection& d : predictions) {
        if (d.cls == VehicleClass::NonTruck) continue;  // other vehicles are ignored
        nearest = std::min(nearest, distance(d.position, gt.gt_position));
    }
    return nearest <= threshold ? MatchOutcome::TP : MatchOutcome::FN;
}

void ConfusionCounts::add(MatchOutcome o) {
    switch (o) {
        case MatchOutcome::TP: ++tp; break;
        case MatchOutcome::FP: ++fp; break;
        case MatchOutcome::FN: ++fn; break;
        case MatchOutcome::TN: ++tn; break;
    }
}

MetricsReport compute_metrics(const ConfusionCounts& c) {
    MetricsReport r;
    if (c.tp + c.fp > 0) r.precision = static_cast<double>(c.tp) / (c.tp + c.fp);
    if (c.tp + c.fn > 0) r.recall = static_cast<double>(c.tp) / (c.tp + c.fn);
    if (r.precision && r.recall && (*r.precision + *r.recall) > 0.0) {
        r.f1 = 2.0 * (*r.precision) * (*r.recall) / (*r.precision + *r.recall);
    }
    return r;
}

ProfileReport profile_report(const std::vector<TimingSample>& samples, double budget_seconds) {
    if (samples.empty()) throw InsufficientDataError("profile_report needs at least one sample");

    ProfileReport r;
    r.sample_count = samples.size();
    r.budget_seconds = budget_seconds;

    std::vector<double> times;
    times.reserve(samples.size());
    double sum_t = 0.0, sum_c = 0.0;
    std::size_t over = 0;
    for (const TimingSample& s : samples) {
        times.push_back(s.processing_seconds);
        sum_t += s.processing_seconds;
        sum_c += static_cast<double>(s.foreground_point_count);
        if (s.processing_seconds > budget_seconds) ++over;
    }
    const double n = static_cast<double>(samples.size());
    r.mean_seconds = sum_t / n;
    r.max_seconds = *std::max_element(times.begin(), times.end());
    r.over_budget_fraction = static_cast<double>(over) / n;

    std::sort(times.begin(), times.end());
    const std::size_t rank =
        static_cast<std::size_t>(std::ceil(0.99 * n)) == 0
            ? 0
            : static_cast<std::size_t>(std::ceil(0.99 * n)) - 1;  // nearest-rank percentile
    r.p99_seconds = times[std::min(rank, times.size() - 1)];

    const double mean_c = sum_c / n;
    const double mean_t = r.mean_seconds;
    double cov = 0.0, var_c = 0.0, var_t = 0.0;
    for (const TimingSample& s : samples) {
        const double dc = static_cast<double>(s.foreground_point_count) - mean_c;
        const double dt = s.processing_seconds - mean_t;
        cov += dc * dt;
        var_c += dc * dc;
        var_t += dt * dt;
    }
    if (var_c > 0.0 && var_t > 0.0) {
        r.count_time_correlation = cov / std::sqrt(var_c * var_t);
    }
    return r;
}

}  // namespace fsp
