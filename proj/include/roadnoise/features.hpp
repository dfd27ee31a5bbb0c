#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "roadnoise/audio_buffer.hpp"
#include "roadnoise/events.hpp"

namespace roadnoise {

/// Shape of the per-event log-spectrogram patch. The defaults give a
/// 32x64 patch (frames x bins), about 0.27 s of context at 16 kHz.
struct FeatureConfig {
    std::size_t frames = 32;     // T
    std::size_t bins = 64;       // F, lowest bins kept
    std::size_t frame_size = 256;
    std::size_t hop = 128;

    std::size_t flat_size() const { return frames * bins; }
    std::size_t slice_samples() const { return frames * hop + frame_size; }
    void validate() const;
};

/// Fixed-shape feature patch, row-major [frame][bin].
struct FeatureTensor {
    std::size_t frames = 0;
    std::size_t bins = 0;
    std::vector<double> values;
    std::string event_ref; // originating segment id, e.g. "dry_003:2"

    double& at(std::size_t t, std::size_t f) { return values[t * bins + f]; }
    double at(std::size_t t, std::size_t f) const { return values[t * bins + f]; }
};

/// Per-cell z-scoring statistics fitted on a training set. Standard
/// deviations are floored at 1e-8.
struct Standardizer {
    std::size_t frames = 0;
    std::size_t bins = 0;
    std::vector<double> mean;
    std::vector<double> stddev;
};

/// Cut the segment out of the buffer (center-cropped or symmetrically
/// zero-padded to the configured slice length), take a Hann-windowed
/// one-sided magnitude spectrogram, keep the lowest `bins` bins and apply
/// log(1 + magnitude). Deterministic; output shape is always frames x bins.
FeatureTensor event_features(const AudioBuffer& buffer, const EventSegment& segment,
                             const FeatureConfig& config);

Standardizer fit_standardizer(const std::vector<FeatureTensor>& tensors);
FeatureTensor apply_standardizer(const FeatureTensor& tensor, const Standardizer& s);

/// JSON round-trip for a standardizer; values survive exactly (shortest
/// round-trip serialization). Used to persist one alongside a model.
std::string standardizer_to_json(const Standardizer& s);
Standardizer standardizer_from_json(const std::string& text);

/// Persist a tensor batch as <prefix>.bin (raw little-endian doubles) with
/// a <prefix>.json sidecar carrying shape, count, event refs and the
/// pipeline config hash. load_tensors refuses a sidecar whose hash does
/// not match `expect_config_hash` (pass empty to skip the check).
void save_tensors(const std::filesystem::path& prefix,
                  const std::vector<FeatureTensor>& tensors,
                  const std::string& config_hash);
std::vector<FeatureTensor> load_tensors(const std::filesystem::path& prefix,
                                        const std::string& expect_config_hash = {});

} // namespace roadnoise
