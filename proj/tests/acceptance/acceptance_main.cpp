// Acceptance suite: one pass/fail line per criterion, exit code equals
// the number of failed criteria. Criteria 3-5 and 8 run the full
// two-condition evaluation on the reference synthetic corpus (seed 42,
// default spec and pipeline config); everything else checks the numeric
// core directly against independent oracles.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "roadnoise/autoencoder.hpp"
#include "roadnoise/config.hpp"
#include "roadnoise/dsp.hpp"
#include "roadnoise/events.hpp"
#include "roadnoise/evaluation.hpp"
#include "roadnoise/report.hpp"
#include "roadnoise/rng.hpp"
#include "roadnoise/synth.hpp"

namespace fs = std::filesystem;
using namespace roadnoise;
using clock_type = std::chrono::steady_clock;

namespace {

constexpr double kPi = 3.14159265358979323846;

int g_failures = 0;

void verdict(int index, const char* name, bool pass, const std::string& detail) {
    std::printf("[%d/8] %-24s %s  %s\n", index, name, pass ? "PASS" : "FAIL",
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

double elapsed_s(clock_type::time_point start) {
    return std::chrono::duration<double>(clock_type::now() - start).count();
}

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    return buf;
}

AudioBuffer tone(double freq, int rate, std::size_t n, double amp = 1.0) {
    AudioBuffer buf;
    buf.sample_rate_hz = rate;
    buf.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        buf.samples[i] = amp * std::sin(2.0 * kPi * freq * i / rate);
    return buf;
}

double rms(const std::vector<double>& x) {
    double acc = 0.0;
    for (double v : x) acc += v * v;
    return std::sqrt(acc / static_cast<double>(x.size()));
}

// ------------------------------------------------------------ criterion 1

bool dsp_correctness(std::string& detail) {
    Rng rng(101);
    double worst_roundtrip = 0.0, worst_parseval = 0.0;
    for (std::size_t n : {64ul, 481ul, 1000ul, 1021ul}) {
        std::vector<double> x(n);
        double scale = 0.0;
        for (double& v : x) {
            v = rng.uniform(-1.0, 1.0);
            scale = std::max(scale, std::abs(v));
        }
        const auto bins = dft(std::span<const double>(x));
        const auto back = inverse_dft(bins);
        for (std::size_t i = 0; i < n; ++i)
            worst_roundtrip = std::max(
                worst_roundtrip,
                std::hypot(back[i].real() - x[i], back[i].imag()) / scale);

        double te = 0.0, fe = 0.0;
        for (double v : x) te += v * v;
        for (const auto& b : bins) fe += std::norm(b);
        fe /= static_cast<double>(n);
        worst_parseval = std::max(worst_parseval, std::abs(te - fe) / te);
    }
    if (worst_roundtrip > 1e-9 || worst_parseval > 1e-9) {
        detail = fmt("roundtrip %.2e parseval %.2e exceed 1e-9", worst_roundtrip,
                     worst_parseval);
        return false;
    }

    // idempotence and linearity of the mask
    double worst_idem = 0.0, worst_lin = 0.0;
    {
        AudioBuffer x, y;
        x.sample_rate_hz = y.sample_rate_hz = 8000;
        x.samples.resize(1536);
        y.samples.resize(1536);
        for (double& v : x.samples) v = rng.uniform(-1.0, 1.0);
        for (double& v : y.samples) v = rng.uniform(-1.0, 1.0);
        const auto fx = band_pass(x, BandSpec{});
        const auto ffx = band_pass(fx, BandSpec{});
        for (std::size_t i = 0; i < x.samples.size(); ++i)
            worst_idem =
                std::max(worst_idem, std::abs(ffx.samples[i] - fx.samples[i]));

        const double a = 1.7, b = -0.6;
        AudioBuffer mix = x;
        for (std::size_t i = 0; i < x.samples.size(); ++i)
            mix.samples[i] = a * x.samples[i] + b * y.samples[i];
        const auto fy = band_pass(y, BandSpec{});
        const auto fmix = band_pass(mix, BandSpec{});
        for (std::size_t i = 0; i < x.samples.size(); ++i)
            worst_lin = std::max(
                worst_lin, std::abs(fmix.samples[i] -
                                    (a * fx.samples[i] + b * fy.samples[i])));
    }
    if (worst_idem > 1e-9 || worst_lin > 1e-9) {
        detail =
            fmt("idempotence %.2e linearity %.2e exceed 1e-9", worst_idem, worst_lin);
        return false;
    }

    // keep-band tone preserved within 1%, stop-band tone crushed
    const AudioBuffer kept = band_pass(tone(100.0, 1000, 1000), BandSpec{});
    const double kept_ratio =
        rms(kept.samples) / rms(tone(100.0, 1000, 1000).samples);
    const AudioBuffer removed = band_pass(tone(400.0, 1000, 1000), BandSpec{});
    const double removed_rms = rms(removed.samples);
    if (std::abs(kept_ratio - 1.0) > 0.01 || removed_rms > 1e-6) {
        detail = fmt("kept-tone ratio %.4f, removed-tone rms %.2e", kept_ratio,
                     removed_rms);
        return false;
    }

    detail = fmt("roundtrip %.1e parseval %.1e idem %.1e lin %.1e rms_out %.1e",
                 worst_roundtrip, worst_parseval, worst_idem, worst_lin,
                 removed_rms);
    return true;
}

// ------------------------------------------------------------ criterion 2

bool extractor_rules(std::string& detail) {
    ExtractionConfig exact;
    exact.smoothing_window_ms = 1.0; // one sample at 1000 Hz

    AudioBuffer burst100;
    burst100.sample_rate_hz = 1000;
    burst100.samples.assign(1000, 0.0);
    for (std::size_t i = 100; i <= 199; ++i) burst100.samples[i] = 1.0;
    const auto events100 = extract_events(burst100, exact);
    if (events100.size() != 1 || events100[0].start_sample != 100 ||
        events100[0].end_sample != 199) {
        detail = fmt("100 ms burst gave %zu events", events100.size());
        return false;
    }

    AudioBuffer burst30 = burst100;
    std::fill(burst30.samples.begin(), burst30.samples.end(), 0.0);
    for (std::size_t i = 100; i <= 129; ++i) burst30.samples[i] = 1.0;
    if (!extract_events(burst30, exact).empty()) {
        detail = "30 ms burst was not rejected";
        return false;
    }

    AudioBuffer pair;
    pair.sample_rate_hz = 1000;
    pair.samples.assign(1000, 0.0);
    for (std::size_t i = 100; i <= 159; ++i) pair.samples[i] = 1.0;
    for (std::size_t i = 165; i <= 224; ++i) pair.samples[i] = 1.0; // 5 ms gap
    ExtractionConfig merge_config = exact;
    merge_config.smoothing_window_ms = 3.0;
    const auto merged = extract_events(pair, merge_config);
    if (merged.size() != 1) {
        detail = fmt("5 ms-gap pair gave %zu events instead of 1", merged.size());
        return false;
    }

    // amplitude-scale equivariance, exact, on 100 randomized buffers
    Rng rng(202);
    for (int trial = 0; trial < 100; ++trial) {
        AudioBuffer buf;
        buf.sample_rate_hz = 4000;
        buf.samples.assign(3000, 0.0);
        const std::size_t n_bursts = 1 + rng.below(4);
        for (std::size_t b = 0; b < n_bursts; ++b) {
            const std::size_t len = 100 + rng.below(500);
            const std::size_t start = rng.below(3000 - len);
            for (std::size_t i = start; i < start + len; ++i)
                buf.samples[i] += rng.normal() * 0.3;
        }
        AudioBuffer scaled = buf;
        const double c = std::exp(rng.uniform(-2.0, 2.0));
        for (double& v : scaled.samples) v *= c;

        const auto base = extract_events(buf, ExtractionConfig{});
        const auto equiv = extract_events(scaled, ExtractionConfig{});
        if (base.size() != equiv.size()) {
            detail = fmt("trial %d: event count changed under scaling", trial);
            return false;
        }
        for (std::size_t i = 0; i < base.size(); ++i)
            if (base[i].start_sample != equiv[i].start_sample ||
                base[i].end_sample != equiv[i].end_sample) {
                detail = fmt("trial %d: boundaries moved under scaling", trial);
                return false;
            }
    }

    detail = "burst/duration/merge rules and 100 equivariance trials";
    return true;
}

// ------------------------------------------------------------ criterion 6

std::vector<double> forward_oracle(const AutoencoderModel& m,
                                   const std::vector<double>& input) {
    std::vector<double> a = input;
    for (std::size_t l = 0; l < m.layer_count(); ++l) {
        const std::size_t in_dim = m.dims[l];
        const std::size_t out_dim = m.dims[l + 1];
        std::vector<double> z(out_dim);
        for (std::size_t o = 0; o < out_dim; ++o) {
            double acc = m.biases[l][o];
            for (std::size_t i = 0; i < in_dim; ++i)
                acc += a[i] * m.weights[l][i * out_dim + o];
            z[o] = acc;
        }
        if (l + 1 < m.layer_count())
            for (double& v : z) v = v > 0.0 ? v : m.leaky_slope * v;
        a = std::move(z);
    }
    return a;
}

double loss_oracle(const AutoencoderModel& m, const std::vector<FeatureTensor>& set) {
    double total = 0.0;
    for (const auto& t : set) {
        const auto out = forward_oracle(m, t.values);
        double acc = 0.0;
        for (std::size_t i = 0; i < out.size(); ++i) {
            const double diff = out[i] - t.values[i];
            acc += diff * diff;
        }
        total += acc / static_cast<double>(out.size());
    }
    return total / static_cast<double>(set.size());
}

bool autoencoder_numerics(const EvaluationReport& report, std::string& detail) {
    // exact backprop vs central finite differences on a D=4 model
    Rng rng(303);
    const AutoencoderModel model = init_model({4, 4, 4}, 17);
    std::vector<FeatureTensor> batch;
    for (int i = 0; i < 3; ++i) {
        FeatureTensor t;
        t.frames = 1;
        t.bins = 4;
        t.values = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1),
                    rng.uniform(-1, 1)};
        batch.push_back(t);
    }
    const LossGradients grads = loss_gradients(model, batch);
    const double eps = 1e-5;
    double worst_rel = 0.0;
    for (std::size_t l = 0; l < model.layer_count(); ++l) {
        for (std::size_t idx = 0; idx < model.weights[l].size(); ++idx) {
            AutoencoderModel plus = model, minus = model;
            plus.weights[l][idx] += eps;
            minus.weights[l][idx] -= eps;
            const double numeric =
                (loss_oracle(plus, batch) - loss_oracle(minus, batch)) / (2 * eps);
            const double analytic = grads.weights[l][idx];
            const double denom =
                std::max({std::abs(numeric), std::abs(analytic), 1e-5});
            worst_rel = std::max(worst_rel, std::abs(analytic - numeric) / denom);
        }
        for (std::size_t idx = 0; idx < model.biases[l].size(); ++idx) {
            AutoencoderModel plus = model, minus = model;
            plus.biases[l][idx] += eps;
            minus.biases[l][idx] -= eps;
            const double numeric =
                (loss_oracle(plus, batch) - loss_oracle(minus, batch)) / (2 * eps);
            const double analytic = grads.biases[l][idx];
            const double denom =
                std::max({std::abs(numeric), std::abs(analytic), 1e-5});
            worst_rel = std::max(worst_rel, std::abs(analytic - numeric) / denom);
        }
    }
    if (worst_rel > 1e-4) {
        detail = fmt("gradient mismatch %.2e exceeds 1e-4", worst_rel);
        return false;
    }

    // strict loss decrease over the first five epochs of the real
    // (default-config) evaluation trainings
    for (const ConditionResult* r : {&report.original, &report.noise_reduced}) {
        if (r->loss_history.size() < 5) {
            detail = fmt("evaluation training ran only %zu epochs",
                         r->loss_history.size());
            return false;
        }
        for (std::size_t e = 1; e < 5; ++e)
            if (!(r->loss_history[e].train_mse < r->loss_history[e - 1].train_mse)) {
                detail = fmt("loss did not strictly decrease at epoch %zu", e);
                return false;
            }
    }

    // identical seeds reproduce identical loss histories bit-exactly
    Rng data_rng(404);
    std::vector<FeatureTensor> set;
    for (int i = 0; i < 12; ++i) {
        FeatureTensor t;
        t.frames = 1;
        t.bins = 8;
        t.values.resize(8);
        for (double& v : t.values) v = data_rng.uniform(-1, 1);
        set.push_back(t);
    }
    const AutoencoderModel m8 = init_model({8, 8, 8}, 5);
    TrainConfig tc;
    tc.epochs = 25;
    const TrainResult a = train(m8, set, {set[0], set[1]}, tc);
    const TrainResult b = train(m8, set, {set[0], set[1]}, tc);
    if (a.history.size() != b.history.size()) {
        detail = "repeated training produced different epoch counts";
        return false;
    }
    for (std::size_t e = 0; e < a.history.size(); ++e)
        if (a.history[e].train_mse != b.history[e].train_mse ||
            a.history[e].val_mse != b.history[e].val_mse) {
            detail = fmt("loss histories differ at epoch %zu", e);
            return false;
        }

    detail = fmt("grad check %.1e; 5-epoch descent on both conditions; "
                 "bit-identical reruns",
                 worst_rel);
    return true;
}

// ------------------------------------------------------------ criterion 7

double auroc_brute_force(const std::vector<double>& normal,
                         const std::vector<double>& anomalous) {
    std::uint64_t wins = 0, ties = 0;
    for (double n : normal)
        for (double a : anomalous) {
            if (a > n) ++wins;
            else if (a == n) ++ties;
        }
    const std::uint64_t total =
        static_cast<std::uint64_t>(normal.size()) * anomalous.size();
    return static_cast<double>(2 * wins + ties) / static_cast<double>(2 * total);
}

bool auroc_oracle_equivalence(std::string& detail) {
    Rng rng(505);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 1 + rng.below(20);
        const std::size_t m = 1 + rng.below(20);
        std::vector<double> normal(n), anomalous(m);
        if (trial % 2 == 0) {
            // coarse grid: plenty of exact ties
            for (double& v : normal) v = static_cast<double>(rng.below(6)) / 6.0;
            for (double& v : anomalous)
                v = static_cast<double>(rng.below(6)) / 6.0;
        } else {
            for (double& v : normal) v = rng.uniform(0.0, 1.0);
            for (double& v : anomalous) v = rng.uniform(0.0, 1.0);
        }
        if (auroc(normal, anomalous) != auroc_brute_force(normal, anomalous)) {
            detail = fmt("mismatch on trial %d (n=%zu m=%zu)", trial, n, m);
            return false;
        }
    }
    detail = "1000 random score sets, exact match including ties";
    return true;
}

} // namespace

int main() {
    std::setvbuf(stdout, nullptr, _IOLBF, 0);
    const auto suite_start = clock_type::now();
    std::string detail;

    // 1. DSP correctness
    {
        const auto t = clock_type::now();
        const bool ok = dsp_correctness(detail);
        verdict(1, "dsp-correctness", ok, detail + fmt(" [%.1fs]", elapsed_s(t)));
    }

    // 2. Event-extractor rules
    {
        const auto t = clock_type::now();
        const bool ok = extractor_rules(detail);
        verdict(2, "event-extractor-rules", ok,
                detail + fmt(" [%.1fs]", elapsed_s(t)));
    }

    // Reference corpus and the two full evaluation runs (criteria 3-5, 8)
    const fs::path corpus_dir =
        fs::temp_directory_path() / "roadnoise_acceptance_corpus";
    std::fprintf(stderr, "generating reference corpus (seed 42, defaults)...\n");
    fs::remove_all(corpus_dir);
    const CorpusSpec reference_spec; // defaults, seed 42
    save_corpus(generate_corpus(reference_spec), corpus_dir);

    const PipelineConfig config; // defaults
    std::fprintf(stderr, "evaluation run 1 (2 workers)...\n");
    const auto eval1_start = clock_type::now();
    BuildReportOptions two_jobs;
    two_jobs.jobs = 2;
    const EvaluationReport report =
        build_report(load_corpus_index(corpus_dir), config, two_jobs);
    const double eval1_s = elapsed_s(eval1_start);
    std::fprintf(stderr, "evaluation run 1 took %.0f s\n", eval1_s);

    // 3. extraction-accuracy trend under noise reduction
    {
        const double orig = report.original.extraction.driving_ratio;
        const double nr = report.noise_reduced.extraction.driving_ratio;
        const bool ok = (nr - orig >= 0.15) && (orig < 0.90);
        verdict(3, "extraction-ratio-trend", ok,
                fmt("driving ratio %.1f%% -> %.1f%% (needs +15pp and <90%%) "
                    "[%.0fs]",
                    orig * 100, nr * 100, eval1_s));
    }

    // 4. AUROC trend under noise reduction
    {
        bool ok = true;
        std::string parts;
        double summer_gain = 0.0, winter_gain = 0.0;
        for (const auto& scenario : config.scenarios) {
            const auto orig = report.original.auroc_by_scenario.at(scenario.name);
            const auto nr =
                report.noise_reduced.auroc_by_scenario.at(scenario.name);
            if (!orig || !nr) {
                ok = false;
                parts += scenario.name + "=insufficient-data ";
                continue;
            }
            const double gain = *nr - *orig;
            if (scenario.name == "summer") summer_gain = gain;
            if (scenario.name == "winter") winter_gain = gain;
            if (gain < 0.05 || *nr < 0.9) ok = false;
            parts += fmt("%s %.4f->%.4f ", scenario.name.c_str(), *orig, *nr);
        }
        parts += fmt("(winter gain %.3f %s summer gain %.3f; reported, not "
                     "asserted)",
                     winter_gain, winter_gain >= summer_gain ? ">=" : "<",
                     summer_gain);
        verdict(4, "auroc-trend", ok, parts);
    }

    // 5. Normal-score spread narrows under noise reduction
    {
        const auto orig = report.original.normal_mse_iqr;
        const auto nr = report.noise_reduced.normal_mse_iqr;
        const bool ok = orig.has_value() && nr.has_value() && *nr <= *orig;
        verdict(5, "normal-mse-iqr-trend", ok,
                orig && nr ? fmt("IQR %.5f -> %.5f", *orig, *nr)
                           : std::string("missing normal scores"));
    }

    // 6. Autoencoder numerics
    {
        const auto t = clock_type::now();
        const bool ok = autoencoder_numerics(report, detail);
        verdict(6, "autoencoder-numerics", ok,
                detail + fmt(" [%.1fs]", elapsed_s(t)));
    }

    // 7. AUROC oracle equivalence
    {
        const auto t = clock_type::now();
        const bool ok = auroc_oracle_equivalence(detail);
        verdict(7, "auroc-oracle", ok, detail + fmt(" [%.1fs]", elapsed_s(t)));
    }

    // 8. End-to-end determinism (fresh corpus load, different worker count)
    {
        std::fprintf(stderr, "evaluation run 2 (1 worker)...\n");
        const auto t = clock_type::now();
        BuildReportOptions one_job;
        one_job.jobs = 1;
        const EvaluationReport repeat =
            build_report(load_corpus_index(corpus_dir), config, one_job);
        const bool ok = repeat.to_json() == report.to_json();
        verdict(8, "evaluate-determinism", ok,
                fmt("byte-identical reports across runs and worker counts "
                    "[%.0fs]",
                    elapsed_s(t)));
    }

    std::printf("%d/8 criteria passed in %.0f s\n", 8 - g_failures,
                elapsed_s(suite_start));
    return g_failures;
}
