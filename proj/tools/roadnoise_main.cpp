// roadnoise — batch pipeline for roadside-audio surface monitoring.
//
// Subcommands: synth, filter, extract, train, score, evaluate.
// Exit codes: 0 success, 1 pipeline error (single line on stderr),
// 2 usage error.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "roadnoise/audio_io.hpp"
#include "roadnoise/autoencoder.hpp"
#include "roadnoise/config.hpp"
#include "roadnoise/dsp.hpp"
#include "roadnoise/errors.hpp"
#include "roadnoise/log.hpp"
#include "roadnoise/parallel.hpp"
#include "roadnoise/report.hpp"
#include "roadnoise/synth.hpp"

namespace fs = std::filesystem;
using namespace roadnoise;

namespace {

struct CommonArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());
};

PipelineConfig load_config(const CommonArgs& args) {
    PipelineConfig config = args.config_path.empty()
                                ? PipelineConfig{}
                                : PipelineConfig::load(args.config_path);
    if (args.seed) config.train.seed = *args.seed;
    config.validate();
    return config;
}

void write_text_file(const fs::path& path, const std::string& text) {
    if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out) throw IoError("write failure on '" + path.string() + "'");
}

void write_events_csv(const fs::path& path, const std::string& recording_id,
                      const std::vector<EventSegment>& events,
                      const std::string& config_hash) {
    std::ostringstream out;
    out << "# config_hash=" << config_hash << "\n";
    out << "recording_id,start_s,end_s,peak_envelope,mean_envelope\n";
    out.precision(9);
    for (const auto& e : events)
        out << recording_id << ',' << e.start_s << ',' << e.end_s << ','
            << e.peak_envelope << ',' << e.mean_envelope << "\n";
    write_text_file(path, out.str());
}

void write_spectrum_csv(const fs::path& path, const Spectrum& spectrum,
                        const std::string& config_hash) {
    std::ostringstream out;
    out << "# config_hash=" << config_hash << "\n";
    out << "bin_hz,magnitude\n";
    out.precision(9);
    for (std::size_t b = 0; b < spectrum.bin_magnitudes.size(); ++b)
        out << b * spectrum.bin_resolution_hz << ',' << spectrum.bin_magnitudes[b]
            << "\n";
    write_text_file(path, out.str());
}

// ---------------------------------------------------------------- synth --

int cmd_synth(const std::string& spec_path, const std::string& out_dir,
              std::optional<std::uint64_t> seed) {
    CorpusSpec spec;
    if (!spec_path.empty()) {
        std::ifstream in(spec_path);
        if (!in) throw IoError("cannot open corpus spec '" + spec_path + "'");
        std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
        spec = CorpusSpec::from_json(text);
    }
    if (seed) spec.seed = *seed;

    log::info("generating corpus (seed %llu) into %s",
              static_cast<unsigned long long>(spec.seed), out_dir.c_str());
    Corpus corpus = generate_corpus(spec);
    save_corpus(corpus, out_dir);
    std::printf("%s\n", corpus.corpus_id.c_str());
    return 0;
}

// --------------------------------------------------------------- filter --

int cmd_filter(const std::string& in_path, const std::string& out_path,
               const std::string& band_text, const std::string& spectrum_prefix,
               const CommonArgs& common) {
    PipelineConfig config = load_config(common);
    if (!band_text.empty()) {
        const auto comma = band_text.find(',');
        if (comma == std::string::npos)
            throw std::invalid_argument("--band expects 'low,high' fractions");
        config.band.low_fraction = std::stod(band_text.substr(0, comma));
        config.band.high_fraction = std::stod(band_text.substr(comma + 1));
        config.band.validate();
    }

    const AudioBuffer input = read_wav(in_path);
    const AudioBuffer output =
        apply_condition(input, Condition::noise_reduced, config);
    write_wav(output, out_path, "config_hash=" + config.hash());

    if (!spectrum_prefix.empty()) {
        const std::size_t frame =
            std::min<std::size_t>(1024, input.samples.size());
        const std::size_t hop = std::max<std::size_t>(1, frame / 2);
        const Spectrum orig = time_averaged_spectrum(input, frame, hop);
        const Spectrum filt = time_averaged_spectrum(output, frame, hop);
        Spectrum diff = orig;
        for (std::size_t b = 0; b < diff.bin_magnitudes.size(); ++b)
            diff.bin_magnitudes[b] -= filt.bin_magnitudes[b];
        write_spectrum_csv(spectrum_prefix + ".original.csv", orig, config.hash());
        write_spectrum_csv(spectrum_prefix + ".filtered.csv", filt, config.hash());
        write_spectrum_csv(spectrum_prefix + ".difference.csv", diff, config.hash());
    }
    return 0;
}

// -------------------------------------------------------------- extract --

int cmd_extract(const std::string& in_path, const std::string& out_path,
                const CommonArgs& common) {
    PipelineConfig config = load_config(common);
    const AudioBuffer input = read_wav(in_path);
    const auto events = extract_events(input, config.extraction);
    write_events_csv(out_path, fs::path(in_path).stem().string(), events,
                     config.hash());
    log::info("%zu events -> %s", events.size(), out_path.c_str());
    return 0;
}

// ------------------------------------------------------------ train/score --

Condition parse_condition(const std::string& text) {
    if (text == "original") return Condition::original;
    if (text == "noise_reduced") return Condition::noise_reduced;
    throw std::invalid_argument("condition must be 'original' or 'noise_reduced'");
}

struct CollectedTensors {
    std::vector<FeatureTensor> tensors;
    std::vector<EventSegment> segments;
    std::vector<SurfaceLabel> labels;
    std::vector<std::string> splits;
};

CollectedTensors collect_tensors(const CorpusIndex& corpus,
                                 const std::vector<std::size_t>& indices,
                                 Condition condition, const PipelineConfig& config,
                                 const std::vector<std::string>& index_split,
                                 std::size_t jobs) {
    std::vector<DetectedEvents> per_recording(indices.size());
    parallel_for(indices.size(), jobs, [&](std::size_t k) {
        const auto& entry = corpus.entries[indices[k]];
        AudioBuffer raw = read_wav(entry.wav_path);
        if (raw.sample_rate_hz != corpus.spec.sample_rate_hz)
            throw InvalidCorpusError("recording '" + entry.id +
                                     "' does not match the corpus sample rate");
        const AudioBuffer processed = apply_condition(raw, condition, config);
        per_recording[k] = detect_and_featurize(processed, entry.id, config);
    });

    CollectedTensors out;
    for (std::size_t k = 0; k < indices.size(); ++k) {
        const auto& entry = corpus.entries[indices[k]];
        for (std::size_t e = 0; e < per_recording[k].tensors.size(); ++e) {
            out.tensors.push_back(std::move(per_recording[k].tensors[e]));
            out.segments.push_back(per_recording[k].segments[e]);
            out.labels.push_back(entry.label);
            out.splits.push_back(index_split[indices[k]]);
        }
    }
    return out;
}

std::vector<std::string> split_names_per_entry(const CorpusIndex& corpus,
                                               const SplitConfig& split) {
    std::vector<std::string> names(corpus.entries.size(), "score");
    for (std::size_t i : dry_split_recordings(corpus, split, DrySplit::train))
        names[i] = "train";
    for (std::size_t i : dry_split_recordings(corpus, split, DrySplit::val))
        names[i] = "val";
    return names;
}

int cmd_train(const std::string& corpus_dir, const std::string& model_path,
              const std::string& condition_text, const std::string& features_out,
              const CommonArgs& common) {
    PipelineConfig config = load_config(common);
    const Condition condition = parse_condition(condition_text);
    const CorpusIndex corpus = load_corpus_index(corpus_dir);
    const auto splits = split_names_per_entry(corpus, config.split);

    const auto train_ids =
        dry_split_recordings(corpus, config.split, DrySplit::train);
    const auto val_ids = dry_split_recordings(corpus, config.split, DrySplit::val);

    CollectedTensors train_raw =
        collect_tensors(corpus, train_ids, condition, config, splits, common.jobs);
    CollectedTensors val_raw =
        collect_tensors(corpus, val_ids, condition, config, splits, common.jobs);
    if (train_raw.tensors.empty())
        throw InsufficientDataError("no events detected in the dry training split");

    log::info("training on %zu events (%zu validation)", train_raw.tensors.size(),
              val_raw.tensors.size());

    const Standardizer standardizer = fit_standardizer(train_raw.tensors);
    for (auto& t : train_raw.tensors) t = apply_standardizer(t, standardizer);
    for (auto& t : val_raw.tensors) t = apply_standardizer(t, standardizer);

    std::vector<std::size_t> dims;
    dims.push_back(config.features.flat_size());
    for (std::size_t w : config.hidden_widths) dims.push_back(w);
    dims.push_back(config.features.flat_size());

    const AutoencoderModel initial = init_model(dims, config.train.seed);
    const TrainResult result =
        train(initial, train_raw.tensors, val_raw.tensors, config.train);

    nlohmann::json extra;
    extra["config"] = nlohmann::json::parse(config.to_json());
    extra["config_hash"] = config.hash();
    extra["condition"] = to_string(condition);
    extra["corpus_id"] = corpus.corpus_id;
    extra["standardizer"] = nlohmann::json::parse(standardizer_to_json(standardizer));
    save_model(result.model, model_path, extra.dump());
    save_loss_history(result.history, model_path + ".loss.csv", config.hash());

    if (!features_out.empty())
        save_tensors(features_out, train_raw.tensors, config.hash());

    log::info("model -> %s (epochs run %zu, best %zu)", model_path.c_str(),
              result.epochs_run, result.best_epoch);
    return 0;
}

int cmd_score(const std::string& corpus_dir, const std::string& model_path,
              const std::string& out_path, const CommonArgs& common) {
    std::string extra_text;
    const AutoencoderModel model = load_model(model_path, &extra_text);
    const nlohmann::json extra = nlohmann::json::parse(extra_text);

    PipelineConfig config;
    if (!common.config_path.empty())
        config = PipelineConfig::load(common.config_path);
    else if (extra.contains("config"))
        config = PipelineConfig::from_json(extra["config"].dump());
    const Condition condition =
        parse_condition(extra.value("condition", "noise_reduced"));
    const Standardizer standardizer =
        standardizer_from_json(extra.at("standardizer").dump());

    const CorpusIndex corpus = load_corpus_index(corpus_dir);
    const auto splits = split_names_per_entry(corpus, config.split);

    std::vector<std::size_t> all_ids(corpus.entries.size());
    for (std::size_t i = 0; i < all_ids.size(); ++i) all_ids[i] = i;
    CollectedTensors collected =
        collect_tensors(corpus, all_ids, condition, config, splits, common.jobs);

    const auto scores = score_events(model, standardizer, collected.tensors);

    std::ostringstream csv;
    csv << "# config_hash=" << config.hash() << "\n";
    csv << "event_ref,label,split,start_s,end_s,mse\n";
    csv.precision(12);
    for (std::size_t k = 0; k < scores.size(); ++k)
        csv << scores[k].first << ',' << to_string(collected.labels[k]) << ','
            << collected.splits[k] << ',' << collected.segments[k].start_s << ','
            << collected.segments[k].end_s << ',' << scores[k].second << "\n";
    write_text_file(out_path, csv.str());
    log::info("%zu event scores -> %s", scores.size(), out_path.c_str());
    return 0;
}

// ------------------------------------------------------------- evaluate --

void write_roc_dumps(const EvaluationReport& report, const PipelineConfig& config,
                     const std::string& prefix) {
    for (const Condition condition :
         {Condition::original, Condition::noise_reduced}) {
        const ConditionResult& r = report.condition(condition);
        for (const auto& scenario : config.scenarios) {
            std::vector<double> normal, anomalous;
            auto in_set = [](const std::vector<SurfaceLabel>& set, SurfaceLabel l) {
                return std::find(set.begin(), set.end(), l) != set.end();
            };
            for (const auto& ev : r.scored_events) {
                if (in_set(scenario.normal, ev.label)) normal.push_back(ev.mse);
                else if (in_set(scenario.anomalous, ev.label))
                    anomalous.push_back(ev.mse);
            }
            if (normal.empty() || anomalous.empty()) continue;
            const auto points = roc_points(normal, anomalous);
            std::ostringstream csv;
            csv << "# config_hash=" << config.hash() << "\n";
            csv << "fpr,tpr,threshold\n";
            csv.precision(12);
            for (const auto& p : points)
                csv << p.fpr << ',' << p.tpr << ',' << p.threshold << "\n";
            write_text_file(prefix + "." + to_string(condition) + "." +
                                scenario.name + ".csv",
                            csv.str());
        }
    }
}

void write_scores_dump(const EvaluationReport& report, const PipelineConfig& config,
                       const std::string& path) {
    std::ostringstream csv;
    csv << "# config_hash=" << config.hash() << "\n";
    csv << "condition,event_ref,label,split,start_s,end_s,mse\n";
    csv.precision(12);
    for (const Condition condition :
         {Condition::original, Condition::noise_reduced}) {
        for (const auto& ev : report.condition(condition).scored_events)
            csv << to_string(condition) << ',' << ev.event_ref << ','
                << to_string(ev.label) << ',' << ev.split << ',' << ev.start_s
                << ',' << ev.end_s << ',' << ev.mse << "\n";
    }
    write_text_file(path, csv.str());
}

int cmd_evaluate(const std::string& corpus_dir, const std::string& report_path,
                 const std::string& roc_prefix, const std::string& scores_path,
                 const CommonArgs& common) {
    PipelineConfig config = load_config(common);
    const CorpusIndex corpus = load_corpus_index(corpus_dir);

    BuildReportOptions options;
    options.jobs = common.jobs;
    const EvaluationReport report = build_report(corpus, config, options);

    write_text_file(report_path, report.to_json() + "\n");
    if (!roc_prefix.empty()) write_roc_dumps(report, config, roc_prefix);
    if (!scores_path.empty()) write_scores_dump(report, config, scores_path);

    std::cout << report.render_tables();
    std::cout << "\nreport -> " << report_path << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"roadnoise: driving-event extraction, band-pass noise reduction "
                 "and road-surface anomaly scoring for roadside audio"};
    app.require_subcommand(1);

    CommonArgs common;

    // synth
    auto* synth = app.add_subcommand("synth", "generate a labeled synthetic corpus");
    std::string synth_spec, synth_out;
    std::optional<std::uint64_t> synth_seed;
    synth->add_option("--spec", synth_spec, "corpus spec JSON (defaults when omitted)");
    synth->add_option("--out", synth_out, "output corpus directory")->required();
    synth->add_option("--seed", synth_seed, "override the corpus seed");

    // filter
    auto* filter = app.add_subcommand("filter", "band-pass noise reduction on one WAV");
    std::string filter_in, filter_out, filter_band, filter_spectrum;
    filter->add_option("--in", filter_in, "input WAV")->required();
    filter->add_option("--out", filter_out, "output WAV")->required();
    filter->add_option("--band", filter_band, "override band as 'low,high' fractions");
    filter->add_option("--spectrum-out", filter_spectrum,
                       "write time-averaged spectra CSVs under this prefix");
    filter->add_option("--config", common.config_path, "pipeline config JSON");

    // extract
    auto* extract = app.add_subcommand("extract", "detect driving events in one WAV");
    std::string extract_in, extract_out;
    extract->add_option("--in", extract_in, "input WAV")->required();
    extract->add_option("--out", extract_out, "output events CSV")->required();
    extract->add_option("--config", common.config_path, "pipeline config JSON");

    // train
    auto* train_cmd = app.add_subcommand(
        "train", "train the anomaly autoencoder on dry-split events");
    std::string train_corpus, train_model, train_features_out;
    std::string train_condition = "noise_reduced";
    train_cmd->add_option("--corpus", train_corpus, "corpus directory")->required();
    train_cmd->add_option("--model", train_model, "output model file")->required();
    train_cmd->add_option("--condition", train_condition,
                          "original|noise_reduced (default noise_reduced)");
    train_cmd->add_option("--features-out", train_features_out,
                          "also dump training tensors under this prefix");
    train_cmd->add_option("--config", common.config_path, "pipeline config JSON");
    train_cmd->add_option("--seed", common.seed, "override the training seed");
    train_cmd->add_option("--jobs", common.jobs, "worker threads");

    // score
    auto* score = app.add_subcommand("score", "score corpus events with a model");
    std::string score_corpus, score_model, score_out;
    score->add_option("--corpus", score_corpus, "corpus directory")->required();
    score->add_option("--model", score_model, "model file from 'train'")->required();
    score->add_option("--out", score_out, "output scores CSV")->required();
    score->add_option("--config", common.config_path,
                      "pipeline config JSON (defaults to the model's)");
    score->add_option("--jobs", common.jobs, "worker threads");

    // evaluate
    auto* evaluate = app.add_subcommand(
        "evaluate", "full two-condition evaluation with report");
    std::string eval_corpus, eval_report, eval_roc, eval_scores;
    evaluate->add_option("--corpus", eval_corpus, "corpus directory")->required();
    evaluate->add_option("--report", eval_report, "output report JSON")->required();
    evaluate->add_option("--roc-out", eval_roc, "ROC point CSVs under this prefix");
    evaluate->add_option("--scores-out", eval_scores, "per-event score CSV");
    evaluate->add_option("--config", common.config_path, "pipeline config JSON");
    evaluate->add_option("--seed", common.seed, "override the training seed");
    evaluate->add_option("--jobs", common.jobs, "worker threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (synth->parsed()) return cmd_synth(synth_spec, synth_out, synth_seed);
        if (filter->parsed())
            return cmd_filter(filter_in, filter_out, filter_band, filter_spectrum,
                              common);
        if (extract->parsed()) return cmd_extract(extract_in, extract_out, common);
        if (train_cmd->parsed())
            return cmd_train(train_corpus, train_model, train_condition,
                             train_features_out, common);
        if (score->parsed())
            return cmd_score(score_corpus, score_model, score_out, common);
        if (evaluate->parsed())
            return cmd_evaluate(eval_corpus, eval_report, eval_roc, eval_scores,
                                common);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
