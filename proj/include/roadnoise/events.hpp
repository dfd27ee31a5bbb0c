#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "roadnoise/audio_buffer.hpp"

namespace roadnoise {

/// Detection knobs. Defaults: threshold at the lower 10% of the
/// smoothed signal, peaks kept when they persist for at least 50 ms. merge_gap_ms closes ripple-induced
/// splits; smoothing_window_ms sizes the Hann envelope smoother.
struct ExtractionConfig {
    double threshold_percentile = 10.0; // (0, 100)
    double min_duration_ms = 50.0;
    double smoothing_window_ms = 25.0;
    double merge_gap_ms = 10.0;

    void validate() const;
};

/// One detected driving event. Sample span is inclusive; start_s/end_s
/// use half-open span semantics (end_s = (end_sample+1)/rate) so that
/// end_s - start_s is the duration.
struct EventSegment {
    std::size_t start_sample = 0;
    std::size_t end_sample = 0; // inclusive
    double start_s = 0.0;
    double end_s = 0.0;
    double peak_envelope = 0.0;
    double mean_envelope = 0.0;

    std::size_t length_samples() const { return end_sample - start_sample + 1; }
};

/// Nearest-rank percentile: the ceil(percentile/100 * N)-th smallest
/// value of the envelope.
double compute_threshold(std::span<const double> envelope, double percentile);

/// Threshold-exceeding envelope peaks sustained for min_duration_ms:
///   1. envelope = smooth_envelope(buffer, smoothing_window_ms)
///   2. threshold = compute_threshold(envelope, threshold_percentile)
///   3. maximal runs of envelope > threshold become candidates
///   4. candidates separated by gaps < merge_gap_ms are merged
///   5. candidates shorter than min_duration_ms are dropped
/// Returned segments are sorted and non-overlapping.
std::vector<EventSegment> extract_events(const AudioBuffer& buffer,
                                         const ExtractionConfig& config);

} // namespace roadnoise
