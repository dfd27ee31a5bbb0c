#include "roadnoise/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <span>
#include <sstream>

#include <json.hpp>

#include "roadnoise/audio_io.hpp"
#include "roadnoise/dsp.hpp"
#include "roadnoise/errors.hpp"
#include "roadnoise/parallel.hpp"

namespace roadnoise {

using nlohmann::json;

std::string to_string(Condition c) {
    return c == Condition::original ? "original" : "noise_reduced";
}

AudioBuffer apply_condition(const AudioBuffer& buffer, Condition condition,
                            const PipelineConfig& config) {
    if (condition == Condition::original) return buffer;
    AudioBuffer filtered = band_pass(buffer, config.band);
    return flush_below(filtered, config.noise_floor_rel);
}

namespace {

struct RecordingOutcome {
    std::vector<EventSegment> detected;
    std::vector<FeatureTensor> tensors; // parallel to detected
    MatchCounts counts;
};

const char* split_name(DrySplit s) {
    switch (s) {
        case DrySplit::train: return "train";
        case DrySplit::val: return "val";
        default: return "score";
    }
}

std::vector<DrySplit> assign_dry_splits(std::size_t n_dry, const SplitConfig& split) {
    std::size_t n_train = static_cast<std::size_t>(
        std::floor(split.train_fraction * static_cast<double>(n_dry)));
    n_train = std::clamp<std::size_t>(n_train, 1, n_dry);
    std::size_t n_val = static_cast<std::size_t>(
        std::floor(split.val_fraction * static_cast<double>(n_dry)));
    if (n_train + n_val > n_dry) n_val = n_dry - n_train;

    std::vector<DrySplit> out(n_dry, DrySplit::score);
    for (std::size_t i = 0; i < n_train; ++i) out[i] = DrySplit::train;
    for (std::size_t i = n_train; i < n_train + n_val; ++i) out[i] = DrySplit::val;
    return out;
}

std::vector<std::size_t> sorted_dry_indices(const CorpusIndex& corpus) {
    std::vector<std::size_t> dry;
    for (std::size_t i = 0; i < corpus.entries.size(); ++i)
        if (corpus.entries[i].label == SurfaceLabel::dry) dry.push_back(i);
    std::sort(dry.begin(), dry.end(), [&](std::size_t a, std::size_t b) {
        return corpus.entries[a].id < corpus.entries[b].id;
    });
    return dry;
}

ConditionResult run_condition(const CorpusIndex& corpus, const PipelineConfig& config,
                              Condition condition, const BuildReportOptions& options) {
    const std::size_t n_rec = corpus.entries.size();
    std::vector<RecordingOutcome> outcomes(n_rec);

    parallel_for(n_rec, options.jobs, [&](std::size_t i) {
        const CorpusIndexEntry& entry = corpus.entries[i];
        AudioBuffer raw = read_wav(entry.wav_path);
        if (raw.sample_rate_hz != corpus.spec.sample_rate_hz)
            throw InvalidCorpusError(
                "recording '" + entry.id + "' has sample rate " +
                std::to_string(raw.sample_rate_hz) + ", corpus declares " +
                std::to_string(corpus.spec.sample_rate_hz));

        const AudioBuffer processed = apply_condition(raw, condition, config);
        RecordingOutcome& out = outcomes[i];
        DetectedEvents detected = detect_and_featurize(processed, entry.id, config);
        out.detected = std::move(detected.segments);
        out.tensors = std::move(detected.tensors);
        out.counts = match_events(out.detected, entry.truth.events, config.iou_min);
    });

    ConditionResult result;
    for (const auto& out : outcomes) {
        result.extraction.extracted_count += out.detected.size();
        result.extraction.driving_count += out.counts.driving_count;
        result.extraction.other_count += out.counts.other_count;
        result.extraction.missed_count += out.counts.missed_count;
    }
    result.extraction.driving_ratio =
        result.extraction.extracted_count == 0
            ? 0.0
            : static_cast<double>(result.extraction.driving_count) /
                  static_cast<double>(result.extraction.extracted_count);

    // dry split assignment by id order
    const std::vector<std::size_t> dry_indices = sorted_dry_indices(corpus);
    const std::vector<DrySplit> dry_splits =
        assign_dry_splits(dry_indices.size(), config.split);

    std::vector<DrySplit> rec_split(n_rec, DrySplit::score);
    for (std::size_t k = 0; k < dry_indices.size(); ++k)
        rec_split[dry_indices[k]] = dry_splits[k];

    std::vector<FeatureTensor> train_set, val_set, score_set;
    std::vector<SurfaceLabel> score_labels;
    std::vector<const EventSegment*> score_segments;
    for (std::size_t i = 0; i < n_rec; ++i) {
        const SurfaceLabel label = corpus.entries[i].label;
        const DrySplit split =
            label == SurfaceLabel::dry ? rec_split[i] : DrySplit::score;
        for (std::size_t e = 0; e < outcomes[i].tensors.size(); ++e) {
            switch (split) {
                case DrySplit::train:
                    train_set.push_back(outcomes[i].tensors[e]);
                    break;
                case DrySplit::val:
                    val_set.push_back(outcomes[i].tensors[e]);
                    break;
                case DrySplit::score:
                    score_set.push_back(outcomes[i].tensors[e]);
                    score_labels.push_back(label);
                    score_segments.push_back(&outcomes[i].detected[e]);
                    break;
            }
        }
    }
    result.train_event_count = train_set.size();
    result.val_event_count = val_set.size();

    if (train_set.empty()) {
        // nothing to train on: leave AUROCs unset, extraction counts stand
        for (const auto& s : config.scenarios)
            result.auroc_by_scenario[s.name] = std::nullopt;
        return result;
    }

    const Standardizer standardizer = fit_standardizer(train_set);
    auto standardize_all = [&](std::vector<FeatureTensor>& set) {
        for (auto& t : set) t = apply_standardizer(t, standardizer);
    };
    standardize_all(train_set);
    standardize_all(val_set);

    std::vector<std::size_t> dims;
    dims.push_back(config.features.flat_size());
    for (std::size_t w : config.hidden_widths) dims.push_back(w);
    dims.push_back(config.features.flat_size());

    const AutoencoderModel initial = init_model(dims, config.train.seed);
    TrainResult trained = train(initial, train_set, val_set, config.train);
    result.epochs_run = trained.epochs_run;
    result.best_epoch = trained.best_epoch;
    result.loss_history = trained.history;
    if (!trained.history.empty()) {
        result.final_train_mse = trained.history.back().train_mse;
        result.final_val_mse = trained.history.back().val_mse;
    }

    const auto scores = score_events(trained.model, standardizer, score_set);

    std::vector<std::pair<SurfaceLabel, double>> labeled_scores;
    std::vector<double> normal_scores;
    for (std::size_t k = 0; k < scores.size(); ++k) {
        labeled_scores.emplace_back(score_labels[k], scores[k].second);
        if (score_labels[k] == SurfaceLabel::dry)
            normal_scores.push_back(scores[k].second);

        ScoredEvent ev;
        ev.event_ref = scores[k].first;
        ev.label = score_labels[k];
        ev.split = split_name(DrySplit::score);
        ev.start_s = score_segments[k]->start_s;
        ev.end_s = score_segments[k]->end_s;
        ev.mse = scores[k].second;
        result.scored_events.push_back(std::move(ev));
    }

    for (const auto& scenario : config.scenarios) {
        try {
            result.auroc_by_scenario[scenario.name] =
                run_scenario(labeled_scores, scenario);
        } catch (const InsufficientDataError&) {
            result.auroc_by_scenario[scenario.name] = std::nullopt;
        }
    }

    if (!normal_scores.empty())
        result.normal_mse_iqr =
            interquartile_range(std::span<const double>(normal_scores));
    return result;
}

json counts_to_json(const ExtractionCounts& c) {
    json j;
    j["extracted_count"] = c.extracted_count;
    j["driving_count"] = c.driving_count;
    j["other_count"] = c.other_count;
    j["missed_count"] = c.missed_count;
    j["driving_ratio"] = c.driving_ratio;
    return j;
}

json optional_to_json(const std::optional<double>& v) {
    if (v.has_value()) return *v;
    return nullptr;
}

json training_to_json(const ConditionResult& r) {
    json j;
    j["train_event_count"] = r.train_event_count;
    j["val_event_count"] = r.val_event_count;
    j["epochs_run"] = r.epochs_run;
    j["best_epoch"] = r.best_epoch;
    j["final_train_mse"] = r.final_train_mse;
    j["final_val_mse"] =
        std::isfinite(r.final_val_mse) ? json(r.final_val_mse) : json(nullptr);
    return j;
}

} // namespace

std::vector<std::size_t> dry_split_recordings(const CorpusIndex& corpus,
                                              const SplitConfig& split,
                                              DrySplit which) {
    const std::vector<std::size_t> dry = sorted_dry_indices(corpus);
    const std::vector<DrySplit> splits = assign_dry_splits(dry.size(), split);
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < dry.size(); ++k)
        if (splits[k] == which) out.push_back(dry[k]);
    return out;
}

DetectedEvents detect_and_featurize(const AudioBuffer& processed,
                                    const std::string& recording_id,
                                    const PipelineConfig& config) {
    DetectedEvents out;
    out.segments = extract_events(processed, config.extraction);
    out.tensors.reserve(out.segments.size());
    for (std::size_t e = 0; e < out.segments.size(); ++e) {
        FeatureTensor t = event_features(processed, out.segments[e], config.features);
        t.event_ref = recording_id + ":" + std::to_string(e);
        out.tensors.push_back(std::move(t));
    }
    return out;
}

EvaluationReport build_report(const CorpusIndex& corpus, const PipelineConfig& config,
                              const BuildReportOptions& options) {
    config.validate();
    if (corpus.entries.empty())
        throw InvalidCorpusError("corpus has no recordings");

    EvaluationReport report;
    report.corpus_id = corpus.corpus_id;
    report.config_hash = config.hash();
    report.original = run_condition(corpus, config, Condition::original, options);
    report.noise_reduced =
        run_condition(corpus, config, Condition::noise_reduced, options);
    return report;
}

std::string EvaluationReport::to_json() const {
    json j;
    j["schema_version"] = 1;
    j["corpus_id"] = corpus_id;
    j["config_hash"] = config_hash;
    j["extraction"]["original"] = counts_to_json(original.extraction);
    j["extraction"]["noise_reduced"] = counts_to_json(noise_reduced.extraction);

    json auroc_json;
    for (const auto& [name, value] : original.auroc_by_scenario) {
        std::optional<double> nr_value;
        if (const auto nr_it = noise_reduced.auroc_by_scenario.find(name);
            nr_it != noise_reduced.auroc_by_scenario.end())
            nr_value = nr_it->second;
        json e;
        e["original"] = optional_to_json(value);
        e["noise_reduced"] = optional_to_json(nr_value);
        if (value.has_value() && nr_value.has_value())
            e["improvement_percent"] = improvement_percent(*value, *nr_value);
        else
            e["improvement_percent"] = nullptr;
        auroc_json[name] = e;
    }
    j["auroc"] = auroc_json;

    j["normal_mse_iqr"]["original"] = optional_to_json(original.normal_mse_iqr);
    j["normal_mse_iqr"]["noise_reduced"] =
        optional_to_json(noise_reduced.normal_mse_iqr);
    j["training"]["original"] = training_to_json(original);
    j["training"]["noise_reduced"] = training_to_json(noise_reduced);
    j["scored_event_count"]["original"] = original.scored_events.size();
    j["scored_event_count"]["noise_reduced"] = noise_reduced.scored_events.size();
    return j.dump(2);
}

std::string EvaluationReport::render_tables() const {
    std::ostringstream out;
    char line[160];

    auto pct = [](std::size_t part, std::size_t whole) {
        return whole == 0 ? 0.0
                          : 100.0 * static_cast<double>(part) /
                                static_cast<double>(whole);
    };

    out << "Event extraction accuracy\n";
    std::snprintf(line, sizeof(line), "  %-18s %14s %18s\n", "", "Original",
                  "Noise reduction");
    out << line;
    std::snprintf(line, sizeof(line), "  %-18s %14zu %18zu\n", "Extracted events",
                  original.extraction.extracted_count,
                  noise_reduced.extraction.extracted_count);
    out << line;
    std::snprintf(line, sizeof(line), "  %-18s %8zu (%3.0f%%) %12zu (%3.0f%%)\n",
                  "Driving events", original.extraction.driving_count,
                  pct(original.extraction.driving_count,
                      original.extraction.extracted_count),
                  noise_reduced.extraction.driving_count,
                  pct(noise_reduced.extraction.driving_count,
                      noise_reduced.extraction.extracted_count));
    out << line;
    std::snprintf(line, sizeof(line), "  %-18s %8zu (%3.0f%%) %12zu (%3.0f%%)\n",
                  "Other events", original.extraction.other_count,
                  pct(original.extraction.other_count,
                      original.extraction.extracted_count),
                  noise_reduced.extraction.other_count,
                  pct(noise_reduced.extraction.other_count,
                      noise_reduced.extraction.extracted_count));
    out << line;

    out << "\nAnomaly detection performance (AUROC)\n";
    std::snprintf(line, sizeof(line), "  %-10s %12s %16s %13s\n", "Scenario",
                  "Original", "Noise reduction", "Improvement");
    out << line;
    auto fixed5 = [](const std::optional<double>& v) {
        if (!v.has_value()) return std::string("n/a");
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.5f", *v);
        return std::string(buf);
    };
    for (const auto& [name, value] : original.auroc_by_scenario) {
        std::optional<double> nr;
        if (const auto nr_it = noise_reduced.auroc_by_scenario.find(name);
            nr_it != noise_reduced.auroc_by_scenario.end())
            nr = nr_it->second;
        std::string imp_text = "n/a";
        if (value.has_value() && nr.has_value()) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%ld%%",
                          improvement_percent(*value, *nr));
            imp_text = buf;
        }
        std::snprintf(line, sizeof(line), "  %-10s %12s %16s %13s\n", name.c_str(),
                      fixed5(value).c_str(), fixed5(nr).c_str(), imp_text.c_str());
        out << line;
    }
    return out.str();
}

} // namespace roadnoise
