#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "roadnoise/autoencoder.hpp"
#include "roadnoise/config.hpp"
#include "roadnoise/synth.hpp"

namespace roadnoise {

/// The two pipeline conditions compared throughout the evaluation.
enum class Condition { original, noise_reduced };
std::string to_string(Condition c);

struct ExtractionCounts {
    std::size_t extracted_count = 0;
    std::size_t driving_count = 0;
    std::size_t other_count = 0;
    std::size_t missed_count = 0;
    double driving_ratio = 0.0; // driving / extracted (0 when none extracted)
};

struct ScoredEvent {
    std::string event_ref;
    SurfaceLabel label = SurfaceLabel::dry;
    std::string split; // "train", "val", "score"
    double start_s = 0.0;
    double end_s = 0.0;
    double mse = 0.0;
};

struct ConditionResult {
    ExtractionCounts extraction;
    std::map<std::string, std::optional<double>> auroc_by_scenario;
    std::optional<double> normal_mse_iqr; // over score-split dry events
    std::vector<ScoredEvent> scored_events;
    std::size_t train_event_count = 0;
    std::size_t val_event_count = 0;
    std::size_t epochs_run = 0;
    std::size_t best_epoch = 0;
    double final_train_mse = 0.0;
    double final_val_mse = 0.0;
    std::vector<EpochStats> loss_history;
};

struct EvaluationReport {
    std::string corpus_id;
    std::string config_hash;
    ConditionResult original;
    ConditionResult noise_reduced;

    const ConditionResult& condition(Condition c) const {
        return c == Condition::original ? original : noise_reduced;
    }

    /// Canonical JSON document; identical runs produce identical bytes.
    std::string to_json() const;
    /// Fixed-width text tables (extraction accuracy and AUROC).
    std::string render_tables() const;
};

struct BuildReportOptions {
    std::size_t jobs = 1; // worker threads for per-recording stages
};

/// Run the pipeline end to end on a corpus directory, once per condition:
/// band-pass (noise_reduced only) -> event extraction -> truth matching ->
/// per-event features -> autoencoder trained on dry train-split events ->
/// reconstruction MSE scores -> scenario AUROCs. Deterministic for a given
/// (corpus, config). Throws InvalidCorpusError on mixed sample rates.
EvaluationReport build_report(const CorpusIndex& corpus, const PipelineConfig& config,
                              const BuildReportOptions& options = {});

/// Condition-appropriate view of one recording: the raw buffer, or the
/// band-passed buffer with sub-noise-floor residue flushed to silence.
AudioBuffer apply_condition(const AudioBuffer& buffer, Condition condition,
                            const PipelineConfig& config);

/// Train/validation/score roles for dry recordings. Assignment is by
/// position in id order, so it is a pure function of corpus and config.
enum class DrySplit { train, val, score };

/// Indices into corpus.entries of the dry recordings in the given split.
std::vector<std::size_t> dry_split_recordings(const CorpusIndex& corpus,
                                              const SplitConfig& split,
                                              DrySplit which);

struct DetectedEvents {
    std::vector<EventSegment> segments;
    std::vector<FeatureTensor> tensors; // event_ref = "<recording_id>:<index>"
};

/// Event extraction plus per-event feature tensors for one processed
/// recording.
DetectedEvents detect_and_featurize(const AudioBuffer& processed,
                                    const std::string& recording_id,
                                    const PipelineConfig& config);

} // namespace roadnoise
