#include "roadnoise/audio_buffer.hpp"

#include <cmath>
#include <stdexcept>

namespace roadnoise {

void validate_pipeline_input(const AudioBuffer& buffer) {
    if (buffer.samples.empty())
        throw std::invalid_argument("audio buffer is empty");
    if (buffer.sample_rate_hz < 1000)
        throw std::invalid_argument(
            "sample rate must be >= 1000 Hz, got " +
            std::to_string(buffer.sample_rate_hz));
    for (double s : buffer.samples) {
        if (!std::isfinite(s))
            throw std::invalid_argument("audio buffer contains non-finite sample");
    }
}

} // namespace roadnoise
