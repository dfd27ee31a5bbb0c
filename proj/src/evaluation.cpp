#include "roadnoise/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>

#include "roadnoise/errors.hpp"

namespace roadnoise {

SurfaceLabel surface_label_from_string(const std::string& name) {
    if (name == "dry") return SurfaceLabel::dry;
    if (name == "slush") return SurfaceLabel::slush;
    if (name == "snow") return SurfaceLabel::snow;
    if (name == "wet") return SurfaceLabel::wet;
    throw std::invalid_argument("unknown surface label '" + name + "'");
}

std::string to_string(SurfaceLabel label) {
    switch (label) {
        case SurfaceLabel::dry: return "dry";
        case SurfaceLabel::slush: return "slush";
        case SurfaceLabel::snow: return "snow";
        case SurfaceLabel::wet: return "wet";
    }
    throw std::invalid_argument("invalid surface label value");
}

Scenario summer_scenario() {
    Scenario s;
    s.name = "summer";
    s.anomalous = {SurfaceLabel::wet};
    return s;
}

Scenario winter_scenario() {
    Scenario s;
    s.name = "winter";
    s.anomalous = {SurfaceLabel::slush, SurfaceLabel::snow, SurfaceLabel::wet};
    return s;
}

double segment_iou(const EventSegment& a, const EventSegment& b) {
    const std::size_t lo = std::max(a.start_sample, b.start_sample);
    const std::size_t hi = std::min(a.end_sample, b.end_sample);
    if (hi < lo) return 0.0;
    const double inter = static_cast<double>(hi - lo + 1);
    const double uni = static_cast<double>(a.length_samples()) +
                       static_cast<double>(b.length_samples()) - inter;
    return inter / uni;
}

namespace {

void require_sorted_disjoint(const std::vector<EventSegment>& segments,
                             const char* what) {
    for (std::size_t i = 0; i < segments.size(); ++i) {
        if (segments[i].end_sample < segments[i].start_sample)
            throw std::invalid_argument(std::string(what) +
                                        " contains an inverted segment");
        if (i > 0 && segments[i].start_sample <= segments[i - 1].end_sample)
            throw std::invalid_argument(std::string(what) +
                                        " is not sorted and non-overlapping");
    }
}

} // namespace

MatchCounts match_events(const std::vector<EventSegment>& detected,
                         const std::vector<EventSegment>& truth,
                         double iou_min) {
    require_sorted_disjoint(detected, "detected list");
    require_sorted_disjoint(truth, "truth list");

    struct Pair {
        double iou;
        std::size_t d, t;
    };
    std::vector<Pair> pairs;
    for (std::size_t d = 0; d < detected.size(); ++d)
        for (std::size_t t = 0; t < truth.size(); ++t) {
            const double iou = segment_iou(detected[d], truth[t]);
            if (iou >= iou_min) pairs.push_back({iou, d, t});
        }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        if (a.iou != b.iou) return a.iou > b.iou;
        if (a.d != b.d) return a.d < b.d; // deterministic tie-break
        return a.t < b.t;
    });

    std::vector<bool> d_used(detected.size(), false);
    std::vector<bool> t_used(truth.size(), false);
    MatchCounts counts;
    for (const Pair& p : pairs) {
        if (d_used[p.d] || t_used[p.t]) continue;
        d_used[p.d] = true;
        t_used[p.t] = true;
        ++counts.driving_count;
    }
    counts.other_count = detected.size() - counts.driving_count;
    counts.missed_count = truth.size() - counts.driving_count;
    return counts;
}

double auroc(std::span<const double> normal_scores,
             std::span<const double> anomalous_scores) {
    if (normal_scores.empty() || anomalous_scores.empty())
        throw std::invalid_argument("auroc requires nonempty score lists");

    std::vector<double> normals(normal_scores.begin(), normal_scores.end());
    std::sort(normals.begin(), normals.end());

    // exact integer pair counting: wins (anomalous > normal) and ties
    std::uint64_t wins = 0, ties = 0;
    for (double a : anomalous_scores) {
        const auto lo = std::lower_bound(normals.begin(), normals.end(), a);
        const auto hi = std::upper_bound(lo, normals.end(), a);
        wins += static_cast<std::uint64_t>(lo - normals.begin());
        ties += static_cast<std::uint64_t>(hi - lo);
    }
    const std::uint64_t total =
        static_cast<std::uint64_t>(normals.size()) * anomalous_scores.size();
    return static_cast<double>(2 * wins + ties) / static_cast<double>(2 * total);
}

double run_scenario(const std::vector<std::pair<SurfaceLabel, double>>& scores,
                    const Scenario& scenario) {
    auto contains = [](const std::vector<SurfaceLabel>& set, SurfaceLabel l) {
        return std::find(set.begin(), set.end(), l) != set.end();
    };
    std::vector<double> normal, anomalous;
    for (const auto& [label, score] : scores) {
        if (contains(scenario.normal, label)) normal.push_back(score);
        else if (contains(scenario.anomalous, label)) anomalous.push_back(score);
    }
    if (normal.empty() || anomalous.empty())
        throw InsufficientDataError(
            "scenario '" + scenario.name + "' needs at least one normal and one "
            "anomalous score (got " + std::to_string(normal.size()) + "/" +
            std::to_string(anomalous.size()) + ")");
    return auroc(normal, anomalous);
}

std::vector<RocPoint> roc_points(std::span<const double> normal_scores,
                                 std::span<const double> anomalous_scores) {
    if (normal_scores.empty() || anomalous_scores.empty())
        throw std::invalid_argument("roc_points requires nonempty score lists");

    std::vector<double> thresholds(anomalous_scores.begin(), anomalous_scores.end());
    thresholds.insert(thresholds.end(), normal_scores.begin(), normal_scores.end());
    std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                     thresholds.end());

    const double n_neg = static_cast<double>(normal_scores.size());
    const double n_pos = static_cast<double>(anomalous_scores.size());

    std::vector<RocPoint> points;
    points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
    for (double thr : thresholds) {
        std::size_t tp = 0, fp = 0;
        for (double s : anomalous_scores)
            if (s >= thr) ++tp;
        for (double s : normal_scores)
            if (s >= thr) ++fp;
        points.push_back({fp / n_neg, tp / n_pos, thr});
    }
    return points;
}

long improvement_percent(double before, double after) {
    return std::lround((after - before) / before * 100.0);
}

double interquartile_range(std::span<const double> values) {
    if (values.empty())
        throw std::invalid_argument("interquartile_range of an empty list");
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(v.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(pos);
        const std::size_t hi = std::min(lo + 1, v.size() - 1);
        const double frac = pos - static_cast<double>(lo);
        return v[lo] * (1.0 - frac) + v[hi] * frac;
    };
    return quantile(0.75) - quantile(0.25);
}

} // namespace roadnoise
