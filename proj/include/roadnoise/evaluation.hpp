#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "roadnoise/events.hpp"

namespace roadnoise {

/// Road surface condition of a recording. Dry is the unique normal class.
enum class SurfaceLabel { dry, slush, snow, wet };

SurfaceLabel surface_label_from_string(const std::string& name);
std::string to_string(SurfaceLabel label);

/// Season split: which labels count as normal vs anomalous. Labels in
/// neither set are excluded from the AUROC.
struct Scenario {
    std::string name;
    std::vector<SurfaceLabel> normal{SurfaceLabel::dry};
    std::vector<SurfaceLabel> anomalous;
};

Scenario summer_scenario(); // dry vs wet
Scenario winter_scenario(); // dry vs slush, snow, wet

struct MatchCounts {
    std::size_t driving_count = 0; // detections matched to a true event
    std::size_t other_count = 0;   // unmatched detections
    std::size_t missed_count = 0;  // unmatched true events
};

/// Temporal intersection-over-union on inclusive sample spans.
double segment_iou(const EventSegment& a, const EventSegment& b);

/// Greedy one-to-one matching by descending IoU; pairs with IoU below
/// iou_min never match. Both lists must be sorted and non-overlapping.
MatchCounts match_events(const std::vector<EventSegment>& detected,
                         const std::vector<EventSegment>& truth,
                         double iou_min = 0.3);

/// Rank statistic: the fraction of (normal, anomalous) pairs where the
/// anomalous score is higher, ties counting one half. Computed from exact
/// integer pair counts, so it agrees bit-for-bit with brute-force
/// enumeration. Throws std::invalid_argument on an empty list.
double auroc(std::span<const double> normal_scores,
             std::span<const double> anomalous_scores);

/// AUROC over labeled scores partitioned by the scenario's label sets.
/// Throws InsufficientDataError when either partition ends up empty.
double run_scenario(const std::vector<std::pair<SurfaceLabel, double>>& scores,
                    const Scenario& scenario);

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
    double threshold = 0.0;
};

/// ROC curve points (score >= threshold predicts anomalous), for plotting.
std::vector<RocPoint> roc_points(std::span<const double> normal_scores,
                                 std::span<const double> anomalous_scores);

/// Improvement rounding convention: round((after - before)/before * 100).
long improvement_percent(double before, double after);

/// Interquartile range with linearly interpolated quartiles.
double interquartile_range(std::span<const double> values);

} // namespace roadnoise
