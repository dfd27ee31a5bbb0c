#include "roadnoise/config.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "roadnoise/errors.hpp"

namespace roadnoise {

using nlohmann::json;

void PipelineConfig::validate() const {
    band.validate();
    extraction.validate();
    features.validate();
    train.validate();
    if (!(noise_floor_rel >= 0.0 && noise_floor_rel < 1.0))
        throw std::invalid_argument("noise_floor_rel must lie in [0, 1)");
    if (!(iou_min > 0.0 && iou_min <= 1.0))
        throw std::invalid_argument("iou_min must lie in (0, 1]");
    if (!(split.train_fraction > 0.0 && split.train_fraction < 1.0))
        throw std::invalid_argument("split train_fraction must lie in (0, 1)");
    if (!(split.val_fraction >= 0.0 &&
          split.train_fraction + split.val_fraction < 1.0))
        throw std::invalid_argument("split fractions must leave room for scoring");
    if (scenarios.empty())
        throw std::invalid_argument("at least one scenario is required");
    for (const auto& s : scenarios) {
        if (s.name.empty())
            throw std::invalid_argument("scenario without a name");
        for (SurfaceLabel l : s.normal)
            for (SurfaceLabel a : s.anomalous)
                if (l == a)
                    throw std::invalid_argument(
                        "scenario '" + s.name + "' lists '" + to_string(l) +
                        "' as both normal and anomalous");
    }
    const std::size_t input = features.flat_size();
    for (std::size_t w : hidden_widths)
        if (w < input)
            throw std::invalid_argument(
                "hidden width " + std::to_string(w) +
                " is below the feature size " + std::to_string(input) +
                " (model must be non-compressive)");
}

std::string PipelineConfig::to_json() const {
    json j;
    j["schema_version"] = 1;
    j["band"]["low_fraction"] = band.low_fraction;
    j["band"]["high_fraction"] = band.high_fraction;
    j["band"]["noise_floor_rel"] = noise_floor_rel;
    j["extraction"]["threshold_percentile"] = extraction.threshold_percentile;
    j["extraction"]["min_duration_ms"] = extraction.min_duration_ms;
    j["extraction"]["smoothing_window_ms"] = extraction.smoothing_window_ms;
    j["extraction"]["merge_gap_ms"] = extraction.merge_gap_ms;
    j["features"]["frames"] = features.frames;
    j["features"]["bins"] = features.bins;
    j["features"]["frame_size"] = features.frame_size;
    j["features"]["hop"] = features.hop;
    j["model"]["hidden_widths"] = hidden_widths;
    j["train"]["epochs"] = train.epochs;
    j["train"]["batch_size"] = train.batch_size;
    j["train"]["learning_rate"] = train.learning_rate;
    j["train"]["seed"] = train.seed;
    j["train"]["early_stop_patience"] = train.early_stop_patience;
    j["evaluation"]["iou_min"] = iou_min;
    j["evaluation"]["split"]["train_fraction"] = split.train_fraction;
    j["evaluation"]["split"]["val_fraction"] = split.val_fraction;
    auto scen = json::array();
    for (const auto& s : scenarios) {
        json e;
        e["name"] = s.name;
        auto norm = json::array();
        for (SurfaceLabel l : s.normal) norm.push_back(to_string(l));
        auto anom = json::array();
        for (SurfaceLabel l : s.anomalous) anom.push_back(to_string(l));
        e["normal"] = norm;
        e["anomalous"] = anom;
        scen.push_back(e);
    }
    j["evaluation"]["scenarios"] = scen;
    return j.dump(2);
}

PipelineConfig PipelineConfig::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw FormatError("bad pipeline config: " + std::string(e.what()));
    }

    PipelineConfig c; // defaults, overridden where present
    try {
        if (j.contains("band")) {
            const auto& b = j["band"];
            if (b.contains("low_fraction")) c.band.low_fraction = b["low_fraction"];
            if (b.contains("high_fraction")) c.band.high_fraction = b["high_fraction"];
            if (b.contains("noise_floor_rel")) c.noise_floor_rel = b["noise_floor_rel"];
        }
        if (j.contains("extraction")) {
            const auto& e = j["extraction"];
            if (e.contains("threshold_percentile"))
                c.extraction.threshold_percentile = e["threshold_percentile"];
            if (e.contains("min_duration_ms"))
                c.extraction.min_duration_ms = e["min_duration_ms"];
            if (e.contains("smoothing_window_ms"))
                c.extraction.smoothing_window_ms = e["smoothing_window_ms"];
            if (e.contains("merge_gap_ms"))
                c.extraction.merge_gap_ms = e["merge_gap_ms"];
        }
        if (j.contains("features")) {
            const auto& f = j["features"];
            if (f.contains("frames")) c.features.frames = f["frames"];
            if (f.contains("bins")) c.features.bins = f["bins"];
            if (f.contains("frame_size")) c.features.frame_size = f["frame_size"];
            if (f.contains("hop")) c.features.hop = f["hop"];
        }
        if (j.contains("model") && j["model"].contains("hidden_widths"))
            c.hidden_widths = j["model"]["hidden_widths"].get<std::vector<std::size_t>>();
        if (j.contains("train")) {
            const auto& t = j["train"];
            if (t.contains("epochs")) c.train.epochs = t["epochs"];
            if (t.contains("batch_size")) c.train.batch_size = t["batch_size"];
            if (t.contains("learning_rate")) c.train.learning_rate = t["learning_rate"];
            if (t.contains("seed")) c.train.seed = t["seed"];
            if (t.contains("early_stop_patience"))
                c.train.early_stop_patience = t["early_stop_patience"];
        }
        if (j.contains("evaluation")) {
            const auto& e = j["evaluation"];
            if (e.contains("iou_min")) c.iou_min = e["iou_min"];
            if (e.contains("split")) {
                if (e["split"].contains("train_fraction"))
                    c.split.train_fraction = e["split"]["train_fraction"];
                if (e["split"].contains("val_fraction"))
                    c.split.val_fraction = e["split"]["val_fraction"];
            }
            if (e.contains("scenarios")) {
                c.scenarios.clear();
                for (const auto& s : e["scenarios"]) {
                    Scenario scen;
                    scen.name = s.at("name").get<std::string>();
                    scen.normal.clear();
                    for (const auto& l : s.at("normal"))
                        scen.normal.push_back(
                            surface_label_from_string(l.get<std::string>()));
                    for (const auto& l : s.at("anomalous"))
                        scen.anomalous.push_back(
                            surface_label_from_string(l.get<std::string>()));
                    c.scenarios.push_back(scen);
                }
            }
        }
    } catch (const json::exception& e) {
        throw FormatError("bad pipeline config: " + std::string(e.what()));
    }
    c.validate();
    return c;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path.string() + "'");
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return from_json(text);
}

void PipelineConfig::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << to_json() << '\n';
    if (!out) throw IoError("write failure on '" + path.string() + "'");
}

std::string PipelineConfig::hash() const { return fnv1a64_hex(to_json()); }

std::string fnv1a64_hex(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[h & 0xf];
        h >>= 4;
    }
    return out;
}

} // namespace roadnoise
