#include "roadnoise/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <span>
#include <stdexcept>

#include <json.hpp>

#include "roadnoise/audio_io.hpp"
#include "roadnoise/config.hpp"
#include "roadnoise/dsp.hpp"
#include "roadnoise/errors.hpp"
#include "roadnoise/rng.hpp"

namespace roadnoise {

using nlohmann::json;

namespace {

constexpr double kPi = 3.14159265358979323846;

/// Magnitude gain for one shaped band: cosine roll-off edges plus a
/// dB-per-octave tilt around the band's geometric center.
double band_gain(double f, double low, double high, double tilt_db_per_octave) {
    const double roll = std::min(100.0, 0.2 * (high - low));
    if (f <= low - roll || f >= high + roll) return 0.0;
    double g = 1.0;
    if (f < low) g = 0.5 * (1.0 + std::cos(kPi * (low - f) / roll));
    else if (f > high) g = 0.5 * (1.0 + std::cos(kPi * (f - high) / roll));
    if (tilt_db_per_octave != 0.0 && f > 0.0) {
        const double mid = std::sqrt(low * high);
        g *= std::pow(10.0, tilt_db_per_octave * std::log2(f / mid) / 20.0);
    }
    return g;
}

/// White noise spectrally shaped by `gain(f)` via a local DFT, scaled to
/// unit peak. Deterministic in the rng state.
template <typename GainFn>
std::vector<double> shaped_noise(Rng& rng, std::size_t len, int rate, GainFn gain) {
    std::vector<double> white(len);
    for (double& v : white) v = rng.normal();

    auto bins = dft(std::span<const double>(white));
    for (std::size_t k = 0; k < len; ++k) {
        const std::size_t mirror = std::min(k, len - k);
        const double f = static_cast<double>(mirror) * rate / static_cast<double>(len);
        bins[k] *= gain(f);
    }
    auto shaped = inverse_dft(bins);

    std::vector<double> out(len);
    double peak = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
        out[i] = shaped[i].real();
        peak = std::max(peak, std::abs(out[i]));
    }
    if (peak > 0.0)
        for (double& v : out) v /= peak;
    return out;
}

/// Raised-cosine attack/release envelope (Tukey-like), zero at both ends.
void apply_event_envelope(std::vector<double>& x, double attack_frac,
                          double release_frac) {
    const std::size_t n = x.size();
    const std::size_t a = std::max<std::size_t>(1, static_cast<std::size_t>(
                                                       attack_frac * n));
    const std::size_t r = std::max<std::size_t>(1, static_cast<std::size_t>(
                                                       release_frac * n));
    for (std::size_t i = 0; i < n; ++i) {
        double env = 1.0;
        if (i < a)
            env = 0.5 * (1.0 - std::cos(kPi * static_cast<double>(i) / a));
        const std::size_t from_end = n - 1 - i;
        if (from_end < r)
            env = std::min(env, 0.5 * (1.0 - std::cos(kPi * static_cast<double>(
                                                                from_end) / r)));
        x[i] *= env;
    }
}

void scale_to_peak(std::vector<double>& x, double peak) {
    double p = 0.0;
    for (double v : x) p = std::max(p, std::abs(v));
    if (p > 0.0) {
        const double s = peak / p;
        for (double& v : x) v *= s;
    }
}

std::vector<double> render_event_samples(Rng& rng, const Timbre& timbre, int rate,
                                         double duration_s, double peak) {
    const std::size_t len = std::max<std::size_t>(
        4, static_cast<std::size_t>(std::llround(duration_s * rate)));

    auto gain = [&](double f) {
        double g = band_gain(f, timbre.band_low_hz, timbre.band_high_hz,
                             timbre.tilt_db_per_octave);
        if (timbre.hiss_level > 0.0)
            g += timbre.hiss_level *
                 band_gain(f, timbre.hiss_low_hz, timbre.hiss_high_hz, 0.0);
        return g;
    };
    std::vector<double> x = shaped_noise(rng, len, rate, gain);

    if (timbre.am_depth > 0.0 && timbre.am_rate_hz > 0.0) {
        for (std::size_t i = 0; i < len; ++i) {
            const double t = static_cast<double>(i) / rate;
            const double m = 1.0 - timbre.am_depth * 0.5 *
                                       (1.0 - std::cos(2.0 * kPi *
                                                       timbre.am_rate_hz * t));
            x[i] *= m;
        }
    }

    const double attack = rng.uniform(0.2, 0.35);
    const double release = rng.uniform(0.2, 0.35);
    apply_event_envelope(x, attack, release);
    scale_to_peak(x, peak);
    return x;
}

/// Wind gust: a sub-2 Hz swell plus a short high-band hiss burst centered
/// on the swell. Both components live outside the default keep band,
/// which is what makes the band-pass remove gusts. The swell envelope is
/// a Nuttall window: its sidelobes (< -90 dB) keep the leakage into the
/// keep band far below the pipeline's silence floor, where a plain Hann
/// envelope would leave detectable residue after filtering.
std::vector<double> render_gust_samples(Rng& rng, const CorpusSpec& spec,
                                        double duration_s, double peak) {
    const int rate = spec.sample_rate_hz;
    const std::size_t len = std::max<std::size_t>(
        4, static_cast<std::size_t>(std::llround(duration_s * rate)));

    const double f_lf = rng.uniform(spec.gust_lf_min_hz, spec.gust_lf_max_hz);
    const double phase = rng.uniform(0.0, 2.0 * kPi);

    std::vector<double> x(len);
    for (std::size_t i = 0; i < len; ++i) {
        const double t = static_cast<double>(i) / rate;
        // Nuttall 4-term window, the variant with exactly zero endpoints
        // and a continuous first derivative (no edge step to ring)
        const double u =
            2.0 * kPi * static_cast<double>(i) / static_cast<double>(len - 1);
        const double nuttall = 0.355768 - 0.487396 * std::cos(u) +
                               0.144232 * std::cos(2.0 * u) -
                               0.012604 * std::cos(3.0 * u);
        x[i] = std::sin(2.0 * kPi * f_lf * t + phase) * nuttall;
    }

    // HF burst over the central part of the swell
    const std::size_t hf_len = std::max<std::size_t>(4, len / 3);
    auto hf_gain = [&](double f) {
        return band_gain(f, spec.gust_hf_low_hz, spec.gust_hf_high_hz, 0.0);
    };
    std::vector<double> hf = shaped_noise(rng, hf_len, rate, hf_gain);
    apply_event_envelope(hf, 0.5, 0.5); // pure rise/fall, no flat top
    scale_to_peak(hf, spec.gust_hf_level);
    const std::size_t offset = (len - hf_len) / 2;
    for (std::size_t i = 0; i < hf_len; ++i) x[offset + i] += hf[i];

    scale_to_peak(x, peak);
    return x;
}

std::vector<double> render_click_samples(Rng& rng, const CorpusSpec& spec,
                                         double duration_ms, double peak) {
    const int rate = spec.sample_rate_hz;
    const std::size_t len = std::max<std::size_t>(
        4, static_cast<std::size_t>(std::llround(duration_ms * rate / 1000.0)));
    auto gain = [&](double f) { return band_gain(f, 600.0, 3900.0, 0.0); };
    std::vector<double> x = shaped_noise(rng, len, rate, gain);
    apply_event_envelope(x, 0.5, 0.5);
    scale_to_peak(x, peak);
    return x;
}

void add_at(std::vector<double>& recording, std::size_t start,
            const std::vector<double>& piece) {
    for (std::size_t i = 0; i < piece.size() && start + i < recording.size(); ++i)
        recording[start + i] += piece[i];
}

struct Placement {
    std::size_t start = 0;
    std::size_t len = 0;
};

bool overlaps_any(const Placement& p, const std::vector<Placement>& placed,
                  std::size_t gap_samples) {
    for (const Placement& q : placed) {
        const std::size_t p_end = p.start + p.len + gap_samples;
        const std::size_t q_end = q.start + q.len + gap_samples;
        if (p.start < q_end && q.start < p_end) return true;
    }
    return false;
}

} // namespace

const Timbre& CorpusSpec::timbre(SurfaceLabel label) const {
    switch (label) {
        case SurfaceLabel::dry: return dry;
        case SurfaceLabel::slush: return slush;
        case SurfaceLabel::snow: return snow;
        case SurfaceLabel::wet: return wet;
    }
    throw std::invalid_argument("invalid surface label value");
}

void CorpusSpec::validate() const {
    if (sample_rate_hz < 1000)
        throw std::invalid_argument("corpus sample rate must be >= 1000 Hz");
    if (!(duration_s > 1.0))
        throw std::invalid_argument("recording duration must exceed one second");
    if (recordings_per_label == 0)
        throw std::invalid_argument("recordings_per_label must be positive");
    if (!(event_min_duration_s > 0.0 &&
          event_min_duration_s <= event_max_duration_s))
        throw std::invalid_argument("bad event duration range");
    if (!(event_min_peak > 0.0 && event_min_peak <= event_max_peak))
        throw std::invalid_argument("bad event peak range");
    if (!(events_mean >= 0.0))
        throw std::invalid_argument("events_mean must be >= 0");
    if (!(max_sound_coverage > 0.0 && max_sound_coverage < 0.9))
        throw std::invalid_argument("max_sound_coverage must lie in (0, 0.9)");
    const double nyquist = sample_rate_hz / 2.0;
    if (gust_hf_high_hz >= nyquist)
        throw std::invalid_argument("gust HF band exceeds Nyquist");
}

std::string CorpusSpec::to_json() const {
    auto timbre_json = [](const Timbre& t) {
        json j;
        j["band_low_hz"] = t.band_low_hz;
        j["band_high_hz"] = t.band_high_hz;
        j["tilt_db_per_octave"] = t.tilt_db_per_octave;
        j["hiss_low_hz"] = t.hiss_low_hz;
        j["hiss_high_hz"] = t.hiss_high_hz;
        j["hiss_level"] = t.hiss_level;
        j["am_rate_hz"] = t.am_rate_hz;
        j["am_depth"] = t.am_depth;
        return j;
    };

    json j;
    j["schema_version"] = 1;
    j["seed"] = seed;
    j["sample_rate_hz"] = sample_rate_hz;
    j["duration_s"] = duration_s;
    j["recordings_per_label"] = recordings_per_label;
    j["events"]["mean"] = events_mean;
    j["events"]["min_duration_s"] = event_min_duration_s;
    j["events"]["max_duration_s"] = event_max_duration_s;
    j["events"]["min_peak"] = event_min_peak;
    j["events"]["max_peak"] = event_max_peak;
    j["events"]["min_gap_s"] = event_min_gap_s;
    j["gusts"]["mean"] = gust_mean;
    j["gusts"]["min_duration_s"] = gust_min_duration_s;
    j["gusts"]["max_duration_s"] = gust_max_duration_s;
    j["gusts"]["lf_min_hz"] = gust_lf_min_hz;
    j["gusts"]["lf_max_hz"] = gust_lf_max_hz;
    j["gusts"]["min_peak"] = gust_min_peak;
    j["gusts"]["max_peak"] = gust_max_peak;
    j["gusts"]["hf_low_hz"] = gust_hf_low_hz;
    j["gusts"]["hf_high_hz"] = gust_hf_high_hz;
    j["gusts"]["hf_level"] = gust_hf_level;
    j["clicks"]["mean"] = click_mean;
    j["clicks"]["min_duration_ms"] = click_min_duration_ms;
    j["clicks"]["max_duration_ms"] = click_max_duration_ms;
    j["clicks"]["min_peak"] = click_min_peak;
    j["clicks"]["max_peak"] = click_max_peak;
    j["hiss_level"] = hiss_level;
    j["max_sound_coverage"] = max_sound_coverage;
    j["timbres"]["dry"] = timbre_json(dry);
    j["timbres"]["wet"] = timbre_json(wet);
    j["timbres"]["snow"] = timbre_json(snow);
    j["timbres"]["slush"] = timbre_json(slush);
    return j.dump(2);
}

CorpusSpec CorpusSpec::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw FormatError("bad corpus spec: " + std::string(e.what()));
    }

    CorpusSpec s;
    auto read_timbre = [](const json& t, Timbre& out) {
        if (t.contains("band_low_hz")) out.band_low_hz = t["band_low_hz"];
        if (t.contains("band_high_hz")) out.band_high_hz = t["band_high_hz"];
        if (t.contains("tilt_db_per_octave"))
            out.tilt_db_per_octave = t["tilt_db_per_octave"];
        if (t.contains("hiss_low_hz")) out.hiss_low_hz = t["hiss_low_hz"];
        if (t.contains("hiss_high_hz")) out.hiss_high_hz = t["hiss_high_hz"];
        if (t.contains("hiss_level")) out.hiss_level = t["hiss_level"];
        if (t.contains("am_rate_hz")) out.am_rate_hz = t["am_rate_hz"];
        if (t.contains("am_depth")) out.am_depth = t["am_depth"];
    };

    try {
        if (j.contains("seed")) s.seed = j["seed"];
        if (j.contains("sample_rate_hz")) s.sample_rate_hz = j["sample_rate_hz"];
        if (j.contains("duration_s")) s.duration_s = j["duration_s"];
        if (j.contains("recordings_per_label"))
            s.recordings_per_label = j["recordings_per_label"];
        if (j.contains("events")) {
            const auto& e = j["events"];
            if (e.contains("mean")) s.events_mean = e["mean"];
            if (e.contains("min_duration_s")) s.event_min_duration_s = e["min_duration_s"];
            if (e.contains("max_duration_s")) s.event_max_duration_s = e["max_duration_s"];
            if (e.contains("min_peak")) s.event_min_peak = e["min_peak"];
            if (e.contains("max_peak")) s.event_max_peak = e["max_peak"];
            if (e.contains("min_gap_s")) s.event_min_gap_s = e["min_gap_s"];
        }
        if (j.contains("gusts")) {
            const auto& g = j["gusts"];
            if (g.contains("mean")) s.gust_mean = g["mean"];
            if (g.contains("min_duration_s")) s.gust_min_duration_s = g["min_duration_s"];
            if (g.contains("max_duration_s")) s.gust_max_duration_s = g["max_duration_s"];
            if (g.contains("lf_min_hz")) s.gust_lf_min_hz = g["lf_min_hz"];
            if (g.contains("lf_max_hz")) s.gust_lf_max_hz = g["lf_max_hz"];
            if (g.contains("min_peak")) s.gust_min_peak = g["min_peak"];
            if (g.contains("max_peak")) s.gust_max_peak = g["max_peak"];
            if (g.contains("hf_low_hz")) s.gust_hf_low_hz = g["hf_low_hz"];
            if (g.contains("hf_high_hz")) s.gust_hf_high_hz = g["hf_high_hz"];
            if (g.contains("hf_level")) s.gust_hf_level = g["hf_level"];
        }
        if (j.contains("clicks")) {
            const auto& c = j["clicks"];
            if (c.contains("mean")) s.click_mean = c["mean"];
            if (c.contains("min_duration_ms")) s.click_min_duration_ms = c["min_duration_ms"];
            if (c.contains("max_duration_ms")) s.click_max_duration_ms = c["max_duration_ms"];
            if (c.contains("min_peak")) s.click_min_peak = c["min_peak"];
            if (c.contains("max_peak")) s.click_max_peak = c["max_peak"];
        }
        if (j.contains("hiss_level")) s.hiss_level = j["hiss_level"];
        if (j.contains("max_sound_coverage"))
            s.max_sound_coverage = j["max_sound_coverage"];
        if (j.contains("timbres")) {
            const auto& t = j["timbres"];
            if (t.contains("dry")) read_timbre(t["dry"], s.dry);
            if (t.contains("wet")) read_timbre(t["wet"], s.wet);
            if (t.contains("snow")) read_timbre(t["snow"], s.snow);
            if (t.contains("slush")) read_timbre(t["slush"], s.slush);
        }
    } catch (const json::exception& e) {
        throw FormatError("bad corpus spec: " + std::string(e.what()));
    }
    s.validate();
    return s;
}

std::string CorpusSpec::corpus_id() const {
    return "corpus-" + fnv1a64_hex(to_json());
}

namespace {

CorpusRecording generate_recording(const CorpusSpec& spec, SurfaceLabel label,
                                   const std::string& id, std::uint64_t rec_seed,
                                   RecordingTruth& truth) {
    const int rate = spec.sample_rate_hz;
    const std::size_t n =
        static_cast<std::size_t>(std::llround(spec.duration_s * rate));
    Rng rng(rec_seed);

    std::vector<double> samples(n, 0.0);
    truth.id = id;
    truth.label = label;

    const std::size_t margin = static_cast<std::size_t>(0.25 * rate);
    const std::size_t gap_samples =
        static_cast<std::size_t>(spec.event_min_gap_s * rate);

    // --- driving events ---
    const std::size_t n_events = rng.poisson(spec.events_mean);
    std::vector<Placement> placed;
    for (std::size_t e = 0; e < n_events; ++e) {
        const double dur =
            rng.uniform(spec.event_min_duration_s, spec.event_max_duration_s);
        const double peak = rng.uniform(spec.event_min_peak, spec.event_max_peak);
        const std::size_t len =
            static_cast<std::size_t>(std::llround(dur * rate));
        if (len + 2 * margin >= n)
            throw GenerationError("recording too short for the requested events; "
                                  "lower the density or extend duration_s");

        Placement p{0, len};
        bool ok = false;
        for (int attempt = 0; attempt < 2000; ++attempt) {
            p.start = margin + static_cast<std::size_t>(
                                   rng.below(n - len - 2 * margin));
            if (!overlaps_any(p, placed, gap_samples)) {
                ok = true;
                break;
            }
        }
        if (!ok)
            throw GenerationError(
                "could not place " + std::to_string(n_events) +
                " events without overlap; lower the event density");
        placed.push_back(p);

        auto piece = render_event_samples(rng, spec.timbre(label), rate, dur, peak);
        add_at(samples, p.start, piece);

        EventSegment seg;
        seg.start_sample = p.start;
        seg.end_sample = p.start + piece.size() - 1;
        seg.start_s = static_cast<double>(seg.start_sample) / rate;
        seg.end_s = static_cast<double>(seg.end_sample + 1) / rate;
        seg.peak_envelope = peak;
        truth.events.push_back(seg);
    }
    std::sort(truth.events.begin(), truth.events.end(),
              [](const EventSegment& a, const EventSegment& b) {
                  return a.start_sample < b.start_sample;
              });

    double covered_s = 0.0;
    for (const Placement& p : placed)
        covered_s += static_cast<double>(p.len) / rate;

    // --- wind gusts (coverage-capped so silence keeps the majority) ---
    const std::size_t n_gusts = rng.poisson(spec.gust_mean);
    for (std::size_t g = 0; g < n_gusts; ++g) {
        const double dur =
            rng.uniform(spec.gust_min_duration_s, spec.gust_max_duration_s);
        const double peak = rng.uniform(spec.gust_min_peak, spec.gust_max_peak);
        if (covered_s + dur > spec.max_sound_coverage * spec.duration_s) break;
        const std::size_t len = static_cast<std::size_t>(std::llround(dur * rate));
        if (len + 2 * margin >= n) continue;
        const std::size_t start =
            margin + static_cast<std::size_t>(rng.below(n - len - 2 * margin));

        auto piece = render_gust_samples(rng, spec, dur, peak);
        add_at(samples, start, piece);
        covered_s += dur;

        ContaminantSpan span;
        span.type = "gust";
        span.start_s = static_cast<double>(start) / rate;
        span.end_s = static_cast<double>(start + len) / rate;
        truth.contaminants.push_back(span);
    }

    // --- clicks ---
    const std::size_t n_clicks = rng.poisson(spec.click_mean);
    for (std::size_t c = 0; c < n_clicks; ++c) {
        const double dur_ms =
            rng.uniform(spec.click_min_duration_ms, spec.click_max_duration_ms);
        const double peak = rng.uniform(spec.click_min_peak, spec.click_max_peak);
        const std::size_t len =
            static_cast<std::size_t>(std::llround(dur_ms * rate / 1000.0));
        if (len + 2 * margin >= n) continue;
        const std::size_t start =
            margin + static_cast<std::size_t>(rng.below(n - len - 2 * margin));

        auto piece = render_click_samples(rng, spec, dur_ms, peak);
        add_at(samples, start, piece);

        ContaminantSpan span;
        span.type = "click";
        span.start_s = static_cast<double>(start) / rate;
        span.end_s = static_cast<double>(start + len) / rate;
        truth.contaminants.push_back(span);
    }

    std::sort(truth.contaminants.begin(), truth.contaminants.end(),
              [](const ContaminantSpan& a, const ContaminantSpan& b) {
                  return a.start_s < b.start_s;
              });

    if (spec.hiss_level > 0.0)
        for (double& v : samples) v += spec.hiss_level * rng.normal();

    CorpusRecording rec;
    rec.id = id;
    rec.label = label;
    rec.audio.sample_rate_hz = rate;
    rec.audio.samples = std::move(samples);
    return rec;
}

} // namespace

Corpus generate_corpus(const CorpusSpec& spec) {
    spec.validate();
    constexpr SurfaceLabel kLabels[] = {SurfaceLabel::dry, SurfaceLabel::slush,
                                        SurfaceLabel::snow, SurfaceLabel::wet};
    Corpus corpus;
    corpus.spec = spec;
    corpus.corpus_id = spec.corpus_id();

    for (std::size_t li = 0; li < 4; ++li) {
        for (std::size_t r = 0; r < spec.recordings_per_label; ++r) {
            char id[32];
            std::snprintf(id, sizeof(id), "%s_%03zu",
                          to_string(kLabels[li]).c_str(), r);
            const std::uint64_t rec_seed =
                Rng::derive_seed(spec.seed, li * 10000 + r);
            RecordingTruth truth;
            corpus.recordings.push_back(
                generate_recording(spec, kLabels[li], id, rec_seed, truth));
            corpus.truth.push_back(std::move(truth));
        }
    }
    return corpus;
}

AudioBuffer render_isolated_event(const CorpusSpec& spec, SurfaceLabel label,
                                  double duration_s, double peak,
                                  std::uint64_t seed, double pad_s,
                                  EventSegment* truth_out) {
    spec.validate();
    Rng rng(seed);
    const int rate = spec.sample_rate_hz;
    auto piece = render_event_samples(rng, spec.timbre(label), rate, duration_s, peak);
    const std::size_t pad = static_cast<std::size_t>(std::llround(pad_s * rate));

    AudioBuffer out;
    out.sample_rate_hz = rate;
    out.samples.assign(piece.size() + 2 * pad, 0.0);
    std::copy(piece.begin(), piece.end(), out.samples.begin() + pad);

    if (truth_out) {
        truth_out->start_sample = pad;
        truth_out->end_sample = pad + piece.size() - 1;
        truth_out->start_s = static_cast<double>(pad) / rate;
        truth_out->end_s = static_cast<double>(pad + piece.size()) / rate;
        truth_out->peak_envelope = peak;
    }
    return out;
}

AudioBuffer render_isolated_gust(const CorpusSpec& spec, double duration_s,
                                 double peak, std::uint64_t seed, double pad_s) {
    spec.validate();
    Rng rng(seed);
    const int rate = spec.sample_rate_hz;
    auto piece = render_gust_samples(rng, spec, duration_s, peak);
    const std::size_t pad = static_cast<std::size_t>(std::llround(pad_s * rate));

    AudioBuffer out;
    out.sample_rate_hz = rate;
    out.samples.assign(piece.size() + 2 * pad, 0.0);
    std::copy(piece.begin(), piece.end(), out.samples.begin() + pad);
    return out;
}

namespace {

json truth_to_json(const RecordingTruth& truth, const std::string& wav_rel) {
    json rec;
    rec["id"] = truth.id;
    rec["label"] = to_string(truth.label);
    rec["wav"] = wav_rel;
    auto events = json::array();
    for (const auto& e : truth.events) {
        json ev;
        ev["start_s"] = e.start_s;
        ev["end_s"] = e.end_s;
        ev["peak_amplitude"] = e.peak_envelope;
        events.push_back(ev);
    }
    rec["events"] = events;
    auto contaminants = json::array();
    for (const auto& c : truth.contaminants) {
        json sp;
        sp["type"] = c.type;
        sp["start_s"] = c.start_s;
        sp["end_s"] = c.end_s;
        contaminants.push_back(sp);
    }
    rec["contaminants"] = contaminants;
    return rec;
}

RecordingTruth truth_from_json(const json& rec, int rate) {
    RecordingTruth truth;
    truth.id = rec.at("id").get<std::string>();
    truth.label = surface_label_from_string(rec.at("label").get<std::string>());
    for (const auto& ev : rec.at("events")) {
        EventSegment seg;
        seg.start_s = ev.at("start_s").get<double>();
        seg.end_s = ev.at("end_s").get<double>();
        seg.peak_envelope = ev.value("peak_amplitude", 0.0);
        seg.start_sample = static_cast<std::size_t>(std::llround(seg.start_s * rate));
        seg.end_sample = static_cast<std::size_t>(std::llround(seg.end_s * rate)) - 1;
        truth.events.push_back(seg);
    }
    for (const auto& sp : rec.at("contaminants")) {
        ContaminantSpan span;
        span.type = sp.at("type").get<std::string>();
        span.start_s = sp.at("start_s").get<double>();
        span.end_s = sp.at("end_s").get<double>();
        truth.contaminants.push_back(span);
    }
    return truth;
}

} // namespace

void save_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);

    json truth_doc;
    truth_doc["corpus_id"] = corpus.corpus_id;
    truth_doc["sample_rate_hz"] = corpus.spec.sample_rate_hz;
    auto recs = json::array();

    for (std::size_t i = 0; i < corpus.recordings.size(); ++i) {
        const auto& rec = corpus.recordings[i];
        const std::string label = to_string(rec.label);
        fs::create_directories(dir / label);
        const std::string wav_rel = label + "/" + rec.id + ".wav";
        write_wav(rec.audio, dir / wav_rel, "corpus_id=" + corpus.corpus_id);
        recs.push_back(truth_to_json(corpus.truth[i], wav_rel));
    }
    truth_doc["recordings"] = recs;

    std::ofstream gt(dir / "ground_truth.json", std::ios::trunc);
    if (!gt) throw IoError("cannot write ground_truth.json in '" + dir.string() + "'");
    gt << truth_doc.dump(2) << '\n';

    json spec_doc = json::parse(corpus.spec.to_json());
    spec_doc["corpus_id"] = corpus.corpus_id;
    std::ofstream sp(dir / "corpus_spec.json", std::ios::trunc);
    if (!sp) throw IoError("cannot write corpus_spec.json in '" + dir.string() + "'");
    sp << spec_doc.dump(2) << '\n';
}

CorpusIndex load_corpus_index(const std::filesystem::path& dir) {
    std::ifstream sp(dir / "corpus_spec.json");
    if (!sp)
        throw InvalidCorpusError("missing corpus_spec.json in '" + dir.string() + "'");
    std::string spec_text((std::istreambuf_iterator<char>(sp)),
                          std::istreambuf_iterator<char>());

    CorpusIndex index;
    index.spec = CorpusSpec::from_json(spec_text);
    index.corpus_id = index.spec.corpus_id();

    std::ifstream gt(dir / "ground_truth.json");
    if (!gt)
        throw InvalidCorpusError("missing ground_truth.json in '" + dir.string() + "'");
    json truth_doc;
    try {
        gt >> truth_doc;
    } catch (const json::exception& e) {
        throw InvalidCorpusError("bad ground_truth.json: " + std::string(e.what()));
    }

    if (truth_doc.value("corpus_id", index.corpus_id) != index.corpus_id)
        throw InvalidCorpusError("ground_truth.json belongs to a different corpus");

    try {
        for (const auto& rec : truth_doc.at("recordings")) {
            CorpusIndexEntry entry;
            entry.truth = truth_from_json(rec, index.spec.sample_rate_hz);
            entry.id = entry.truth.id;
            entry.label = entry.truth.label;
            entry.wav_path = dir / rec.at("wav").get<std::string>();
            if (!std::filesystem::exists(entry.wav_path))
                throw InvalidCorpusError("missing recording '" +
                                         entry.wav_path.string() + "'");
            index.entries.push_back(std::move(entry));
        }
    } catch (const json::exception& e) {
        throw InvalidCorpusError("bad ground_truth.json: " + std::string(e.what()));
    }
    return index;
}

} // namespace roadnoise
