#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "roadnoise/autoencoder.hpp"
#include "roadnoise/dsp.hpp"
#include "roadnoise/evaluation.hpp"
#include "roadnoise/events.hpp"
#include "roadnoise/features.hpp"

namespace roadnoise {

/// Split of dry recordings into train/validation/score sets (by sorted
/// recording id, so the split is a pure function of the corpus).
struct SplitConfig {
    double train_fraction = 0.625;
    double val_fraction = 0.125;
};

/// Everything the pipeline is allowed to tune, in one versioned document.
/// The defaults pin the pipeline's core constants (band 0.0003/0.78,
/// 10th-percentile threshold, 50 ms duration rule); the rest are
/// implementation-chosen and documented where they are defined.
struct PipelineConfig {
    BandSpec band;
    /// Applied after band_pass in the noise-reduction stage: masking
    /// residue below this fraction of the peak is treated as silence.
    double noise_floor_rel = 1e-4;
    ExtractionConfig extraction;
    FeatureConfig features;
    std::vector<std::size_t> hidden_widths{2048, 2048};
    TrainConfig train;
    double iou_min = 0.3;
    SplitConfig split;
    std::vector<Scenario> scenarios{summer_scenario(), winter_scenario()};

    void validate() const;

    std::string to_json() const;                      // canonical, pretty
    static PipelineConfig from_json(const std::string& text);
    static PipelineConfig load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    /// FNV-1a 64 over the canonical JSON, as 16 hex digits. Stamped on
    /// every artifact the pipeline emits.
    std::string hash() const;
};

std::string fnv1a64_hex(const std::string& data);

} // namespace roadnoise
