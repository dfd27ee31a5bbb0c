#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "roadnoise/audio_buffer.hpp"
#include "roadnoise/evaluation.hpp"
#include "roadnoise/events.hpp"

namespace roadnoise {

/// Spectral recipe for one surface type. Driving events are band-limited
/// noise bursts; anomalous surfaces differ from dry by tilt, an extra
/// hiss band, and (for slush) amplitude-modulation roughness.
struct Timbre {
    double band_low_hz = 500.0;
    double band_high_hz = 3000.0;
    double tilt_db_per_octave = 0.0;
    double hiss_low_hz = 0.0;
    double hiss_high_hz = 0.0;
    double hiss_level = 0.0;   // relative to the main band magnitude
    double am_rate_hz = 0.0;
    double am_depth = 0.0;     // 0 = none, 1 = full dips
};

/// Deterministic corpus recipe. The seed fully determines the output.
///
/// Construction guarantees the evaluation relies on:
///  - recordings are silent (exact zeros) outside events/contaminants,
///    so the percentile threshold falls on the silent floor;
///  - driving-event energy lies strictly inside the default keep band;
///  - wind-gust energy is concentrated below ~2 Hz and above 0.82*Nyquist,
///    i.e. outside the keep band, so band-passing removes gusts;
///  - total sound coverage is capped so silence keeps a solid majority.
struct CorpusSpec {
    std::uint64_t seed = 42;
    int sample_rate_hz = 16000;
    double duration_s = 60.0;
    std::size_t recordings_per_label = 8;

    // driving events
    double events_mean = 10.0; // Poisson mean per recording
    double event_min_duration_s = 0.3;
    double event_max_duration_s = 1.5;
    double event_min_peak = 0.15;
    double event_max_peak = 0.35;
    double event_min_gap_s = 0.3;

    // wind gusts: slow sub-2 Hz swell plus a high-band hiss burst; the
    // swell's Nuttall mainlobe (+-4/duration) must stay below the keep
    // band's lower edge, hence the duration floor
    double gust_mean = 9.0;
    double gust_min_duration_s = 3.0;
    double gust_max_duration_s = 4.5;
    double gust_lf_min_hz = 0.4;
    double gust_lf_max_hz = 0.7;
    double gust_min_peak = 0.15;
    double gust_max_peak = 0.35;
    double gust_hf_low_hz = 6600.0;
    double gust_hf_high_hz = 7800.0;
    double gust_hf_level = 0.5; // HF burst peak relative to the LF swell peak

    // impulsive clicks: in-band, too short to pass the duration rule even
    // with envelope smoothing. The duration floor keeps a click's spectral
    // skirt (halfwidth ~2/duration) clear of the stopband edges, so
    // band-passing does not ring a click out past the duration rule.
    double click_mean = 8.0;
    double click_min_duration_ms = 8.0;
    double click_max_duration_ms = 15.0;
    double click_min_peak = 0.10;
    double click_max_peak = 0.25;

    // optional broadband noise floor; zero keeps the silence guarantee
    double hiss_level = 0.0;

    // stop placing contaminants once sound covers this recording fraction
    double max_sound_coverage = 0.60;

    Timbre dry{500.0, 3000.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
    Timbre wet{700.0, 3800.0, 4.0, 2600.0, 3900.0, 0.9, 0.0, 0.0};
    Timbre snow{250.0, 1600.0, -4.0, 250.0, 900.0, 0.5, 0.0, 0.0};
    Timbre slush{400.0, 3600.0, 1.0, 1500.0, 3400.0, 0.55, 11.0, 0.8};

    const Timbre& timbre(SurfaceLabel label) const;
    void validate() const;

    std::string to_json() const;
    static CorpusSpec from_json(const std::string& text);

    /// FNV-1a 64 of the canonical spec JSON, prefixed "corpus-".
    std::string corpus_id() const;
};

struct ContaminantSpan {
    std::string type; // "gust" or "click"
    double start_s = 0.0;
    double end_s = 0.0;
};

struct RecordingTruth {
    std::string id;
    SurfaceLabel label = SurfaceLabel::dry;
    std::vector<EventSegment> events; // true driving spans, sorted, disjoint
    std::vector<ContaminantSpan> contaminants;
};

struct CorpusRecording {
    std::string id;
    SurfaceLabel label = SurfaceLabel::dry;
    AudioBuffer audio;
};

struct Corpus {
    CorpusSpec spec;
    std::string corpus_id;
    std::vector<CorpusRecording> recordings; // parallel to truth
    std::vector<RecordingTruth> truth;
};

/// Generate the full labeled corpus in memory. Throws GenerationError
/// when the requested event density cannot be placed without overlap.
Corpus generate_corpus(const CorpusSpec& spec);

/// One driving event in a padded silent buffer; used by the generator
/// self-consistency tests. truth_out receives the event span.
AudioBuffer render_isolated_event(const CorpusSpec& spec, SurfaceLabel label,
                                  double duration_s, double peak,
                                  std::uint64_t seed, double pad_s,
                                  EventSegment* truth_out = nullptr);

/// One wind gust in a padded silent buffer, for attenuation checks.
AudioBuffer render_isolated_gust(const CorpusSpec& spec, double duration_s,
                                 double peak, std::uint64_t seed, double pad_s);

/// Write <label>/<id>.wav plus ground_truth.json and corpus_spec.json.
void save_corpus(const Corpus& corpus, const std::filesystem::path& dir);

/// Directory-backed corpus: audio stays on disk and is loaded on demand.
struct CorpusIndexEntry {
    std::string id;
    SurfaceLabel label = SurfaceLabel::dry;
    std::filesystem::path wav_path;
    RecordingTruth truth;
};

struct CorpusIndex {
    CorpusSpec spec;
    std::string corpus_id;
    std::vector<CorpusIndexEntry> entries;
};

CorpusIndex load_corpus_index(const std::filesystem::path& dir);

} // namespace roadnoise
