#pragma once

#include <vector>

namespace roadnoise {

/// Canonical in-memory signal: mono, double samples nominally in [-1, 1].
/// Every pipeline stage consumes and produces this form.
struct AudioBuffer {
    std::vector<double> samples;
    int sample_rate_hz = 0;

    double duration_s() const {
        return sample_rate_hz > 0
            ? static_cast<double>(samples.size()) / sample_rate_hz
            : 0.0;
    }
};

/// Enforce the invariants required of any buffer entering the pipeline:
/// nonempty, sample rate >= 1000 Hz (the millisecond-based rules degrade
/// below that), all samples finite. Throws std::invalid_argument.
void validate_pipeline_input(const AudioBuffer& buffer);

} // namespace roadnoise
