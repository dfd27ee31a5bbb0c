#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "roadnoise/dsp.hpp"

#include "roadnoise/audio_io.hpp"
#include "roadnoise/errors.hpp"
#include "roadnoise/report.hpp"

using namespace roadnoise;
namespace fs = std::filesystem;

namespace {

CorpusSpec tiny_corpus_spec() {
    CorpusSpec spec;
    spec.seed = 11;
    spec.duration_s = 10.0;
    spec.recordings_per_label = 3; // dry split degenerates to 1/1/1
    spec.events_mean = 3.0;
    spec.gust_mean = 1.5;
    spec.click_mean = 1.0;
    return spec;
}

/// Downscaled model and training so the end-to-end path stays fast; the
/// spec-default shapes are covered by the acceptance run.
PipelineConfig tiny_config() {
    PipelineConfig config;
    config.features.frames = 8;
    config.features.bins = 16;
    config.features.frame_size = 128;
    config.features.hop = 64;
    config.hidden_widths = {128};
    config.train.epochs = 30;
    config.train.batch_size = 8;
    config.split.train_fraction = 0.34; // 1 of 3 dry recordings
    config.split.val_fraction = 0.34;
    return config;
}

const fs::path& tiny_corpus_dir() {
    static const fs::path dir = [] {
        const fs::path d = fs::temp_directory_path() / "roadnoise_report_corpus";
        fs::remove_all(d);
        save_corpus(generate_corpus(tiny_corpus_spec()), d);
        return d;
    }();
    return dir;
}

} // namespace

TEST_CASE("noise reduction keeps silence silent and events audible") {
    const Corpus corpus = generate_corpus(tiny_corpus_spec());
    const PipelineConfig config = tiny_config();
    const auto& audio = corpus.recordings[0].audio;
    const AudioBuffer nr = apply_condition(audio, Condition::noise_reduced, config);
    REQUIRE(nr.samples.size() == audio.samples.size());

    std::size_t zeros = 0;
    double peak = 0.0;
    for (double v : nr.samples) {
        if (v == 0.0) ++zeros;
        peak = std::max(peak, std::abs(v));
    }
    // the flush restores exact silence between sounds, events survive
    CHECK(zeros > nr.samples.size() / 4);
    CHECK(peak > 0.1);

    const AudioBuffer same = apply_condition(audio, Condition::original, config);
    for (std::size_t i = 0; i < audio.samples.size(); ++i)
        CHECK(same.samples[i] == audio.samples[i]);
}

TEST_CASE("build_report produces a structurally sound, deterministic report") {
    const CorpusIndex index = load_corpus_index(tiny_corpus_dir());
    const PipelineConfig config = tiny_config();

    BuildReportOptions options;
    options.jobs = 2;
    const EvaluationReport report = build_report(index, config, options);

    CHECK(report.corpus_id == index.corpus_id);
    CHECK(report.config_hash == config.hash());
    for (const ConditionResult* result : {&report.original, &report.noise_reduced}) {
        CHECK(result->extraction.driving_count + result->extraction.other_count ==
              result->extraction.extracted_count);
        CHECK(result->extraction.driving_ratio <= 1.0);
        CHECK(result->train_event_count > 0);
    }

    // byte-identical on a rerun, fresh corpus load, single-threaded
    const CorpusIndex index2 = load_corpus_index(tiny_corpus_dir());
    BuildReportOptions serial;
    serial.jobs = 1;
    const EvaluationReport repeat = build_report(index2, config, serial);
    CHECK(report.to_json() == repeat.to_json());

    // parseable and carrying the expected sections
    const auto parsed = nlohmann::json::parse(report.to_json());
    CHECK(parsed.contains("extraction"));
    CHECK(parsed.contains("auroc"));
    CHECK(parsed.contains("normal_mse_iqr"));
    CHECK(parsed["extraction"]["original"].contains("driving_ratio"));
    CHECK(parsed["auroc"].contains("summer"));
    CHECK(parsed["auroc"].contains("winter"));

    const std::string tables = report.render_tables();
    CHECK(tables.find("Extracted events") != std::string::npos);
    CHECK(tables.find("summer") != std::string::npos);
}

TEST_CASE("an event-free corpus reports zero counts and null AUROCs") {
    CorpusSpec spec = tiny_corpus_spec();
    spec.events_mean = 0.0;
    spec.gust_mean = 0.0;
    spec.click_mean = 0.0;
    const fs::path dir = fs::temp_directory_path() / "roadnoise_report_empty";
    fs::remove_all(dir);
    save_corpus(generate_corpus(spec), dir);

    const EvaluationReport report =
        build_report(load_corpus_index(dir), tiny_config());
    CHECK(report.original.extraction.extracted_count == 0);
    CHECK(report.noise_reduced.extraction.extracted_count == 0);

    const auto parsed = nlohmann::json::parse(report.to_json());
    CHECK(parsed["auroc"]["summer"]["original"].is_null());
    CHECK(parsed["auroc"]["winter"]["noise_reduced"].is_null());
}

TEST_CASE("mixed sample rates are rejected") {
    const fs::path dir = fs::temp_directory_path() / "roadnoise_report_mixed";
    fs::remove_all(dir);
    save_corpus(generate_corpus(tiny_corpus_spec()), dir);

    // tamper with one recording's rate
    const fs::path victim = dir / "dry" / "dry_000.wav";
    AudioBuffer buf = read_wav(victim);
    buf.sample_rate_hz = 8000;
    write_wav(buf, victim);

    CHECK_THROWS_AS(build_report(load_corpus_index(dir), tiny_config()),
                    InvalidCorpusError);
}

TEST_CASE("filtered detections keep their spectral centroid inside the band") {
    const Corpus corpus = generate_corpus(tiny_corpus_spec());
    const PipelineConfig config = tiny_config();
    const double nyquist = corpus.spec.sample_rate_hz / 2.0;
    const double low_hz = config.band.low_fraction * nyquist;
    const double high_hz = config.band.high_fraction * nyquist;

    std::size_t checked = 0;
    for (const auto& rec : corpus.recordings) {
        const AudioBuffer nr =
            apply_condition(rec.audio, Condition::noise_reduced, config);
        for (const auto& seg : extract_events(nr, config.extraction)) {
            std::vector<double> slice(nr.samples.begin() + seg.start_sample,
                                      nr.samples.begin() + seg.end_sample + 1);
            const auto bins = dft(std::span<const double>(slice));
            double weighted = 0.0, total = 0.0;
            for (std::size_t k = 0; k <= slice.size() / 2; ++k) {
                const double f = static_cast<double>(k) *
                                 corpus.spec.sample_rate_hz /
                                 static_cast<double>(slice.size());
                const double mag = std::abs(bins[k]);
                weighted += f * mag;
                total += mag;
            }
            REQUIRE(total > 0.0);
            const double centroid = weighted / total;
            CHECK(centroid >= low_hz);
            CHECK(centroid <= high_hz);
            ++checked;
        }
    }
    CHECK(checked > 0);
}

TEST_CASE("dry split recordings partition the dry set") {
    const CorpusIndex index = load_corpus_index(tiny_corpus_dir());
    const PipelineConfig config = tiny_config();
    const auto train_ids =
        dry_split_recordings(index, config.split, DrySplit::train);
    const auto val_ids = dry_split_recordings(index, config.split, DrySplit::val);
    const auto score_ids =
        dry_split_recordings(index, config.split, DrySplit::score);
    CHECK(train_ids.size() == 1);
    CHECK(val_ids.size() == 1);
    CHECK(score_ids.size() == 1);
    for (std::size_t i : train_ids)
        CHECK(index.entries[i].label == SurfaceLabel::dry);
}
