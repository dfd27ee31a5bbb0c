#include "roadnoise/events.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "roadnoise/dsp.hpp"

namespace roadnoise {

void ExtractionConfig::validate() const {
    if (!(threshold_percentile > 0.0 && threshold_percentile < 100.0))
        throw std::invalid_argument("threshold_percentile must lie in (0, 100)");
    if (!(min_duration_ms > 0.0))
        throw std::invalid_argument("min_duration_ms must be positive");
    if (!(smoothing_window_ms > 0.0))
        throw std::invalid_argument("smoothing_window_ms must be positive");
    if (!(merge_gap_ms >= 0.0))
        throw std::invalid_argument("merge_gap_ms must be >= 0");
}

double compute_threshold(std::span<const double> envelope, double percentile) {
    if (envelope.empty())
        throw std::invalid_argument("cannot take a percentile of an empty envelope");
    if (!(percentile > 0.0 && percentile < 100.0))
        throw std::invalid_argument("percentile must lie in (0, 100)");

    const std::size_t n = envelope.size();
    // ceil(p*N/100) computed as (p*N)/100 so integral cases stay exact
    std::size_t rank = static_cast<std::size_t>(
        std::ceil(percentile * static_cast<double>(n) / 100.0));
    rank = std::clamp<std::size_t>(rank, 1, n);

    std::vector<double> values(envelope.begin(), envelope.end());
    std::nth_element(values.begin(), values.begin() + (rank - 1), values.end());
    return values[rank - 1];
}

std::vector<EventSegment> extract_events(const AudioBuffer& buffer,
                                         const ExtractionConfig& config) {
    config.validate();
    const std::vector<double> envelope =
        smooth_envelope(buffer, config.smoothing_window_ms);
    const double threshold =
        compute_threshold(std::span<const double>(envelope),
                          config.threshold_percentile);
    const double rate = static_cast<double>(buffer.sample_rate_hz);

    // maximal runs strictly above the threshold
    struct Run {
        std::size_t start, end; // inclusive
    };
    std::vector<Run> runs;
    std::size_t i = 0;
    const std::size_t n = envelope.size();
    while (i < n) {
        if (envelope[i] > threshold) {
            std::size_t j = i;
            while (j + 1 < n && envelope[j + 1] > threshold) ++j;
            runs.push_back({i, j});
            i = j + 1;
        } else {
            ++i;
        }
    }

    // merge runs whose separating gap is shorter than merge_gap_ms
    std::vector<Run> merged;
    for (const Run& r : runs) {
        if (!merged.empty()) {
            const std::size_t gap_samples = r.start - merged.back().end - 1;
            const double gap_ms = static_cast<double>(gap_samples) * 1000.0 / rate;
            if (gap_ms < config.merge_gap_ms) {
                merged.back().end = r.end;
                continue;
            }
        }
        merged.push_back(r);
    }

    std::vector<EventSegment> events;
    for (const Run& r : merged) {
        const std::size_t len = r.end - r.start + 1;
        const double duration_ms = static_cast<double>(len) * 1000.0 / rate;
        if (duration_ms < config.min_duration_ms) continue;

        EventSegment seg;
        seg.start_sample = r.start;
        seg.end_sample = r.end;
        seg.start_s = static_cast<double>(r.start) / rate;
        seg.end_s = static_cast<double>(r.end + 1) / rate;
        double peak = 0.0, sum = 0.0;
        for (std::size_t k = r.start; k <= r.end; ++k) {
            peak = std::max(peak, envelope[k]);
            sum += envelope[k];
        }
        seg.peak_envelope = peak;
        seg.mean_envelope = sum / static_cast<double>(len);
        events.push_back(seg);
    }
    return events;
}

} // namespace roadnoise
