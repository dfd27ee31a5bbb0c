#include "roadnoise/features.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <span>
#include <stdexcept>

#include <json.hpp>

#include "roadnoise/dsp.hpp"
#include "roadnoise/errors.hpp"

namespace roadnoise {

void FeatureConfig::validate() const {
    if (frames == 0 || bins == 0 || frame_size == 0 || hop == 0)
        throw std::invalid_argument("feature config fields must be positive");
    if (bins > frame_size / 2 + 1)
        throw std::invalid_argument(
            "feature bins exceed the one-sided spectrum of frame_size");
}

FeatureTensor event_features(const AudioBuffer& buffer, const EventSegment& segment,
                             const FeatureConfig& config) {
    config.validate();
    validate_pipeline_input(buffer);
    if (segment.end_sample < segment.start_sample ||
        segment.end_sample >= buffer.samples.size())
        throw std::invalid_argument("event segment lies outside the buffer");

    const std::size_t slice_len = config.slice_samples();
    const std::size_t seg_len = segment.length_samples();

    // center-crop long events, center shorter ones in a zero slice
    std::vector<double> slice(slice_len, 0.0);
    if (seg_len >= slice_len) {
        const std::size_t offset = segment.start_sample + (seg_len - slice_len) / 2;
        for (std::size_t i = 0; i < slice_len; ++i)
            slice[i] = buffer.samples[offset + i];
    } else {
        const std::size_t pad = (slice_len - seg_len) / 2;
        for (std::size_t i = 0; i < seg_len; ++i)
            slice[pad + i] = buffer.samples[segment.start_sample + i];
    }

    const std::vector<double> window = hann_window(config.frame_size);

    FeatureTensor out;
    out.frames = config.frames;
    out.bins = config.bins;
    out.values.resize(config.flat_size());

    std::vector<double> frame(config.frame_size);
    for (std::size_t t = 0; t < config.frames; ++t) {
        const double* src = slice.data() + t * config.hop;
        for (std::size_t i = 0; i < config.frame_size; ++i)
            frame[i] = src[i] * window[i];
        auto bins = dft(std::span<const double>(frame));
        for (std::size_t f = 0; f < config.bins; ++f)
            out.at(t, f) = std::log1p(std::abs(bins[f]));
    }
    return out;
}

Standardizer fit_standardizer(const std::vector<FeatureTensor>& tensors) {
    if (tensors.empty())
        throw std::invalid_argument("cannot fit a standardizer on an empty set");
    const std::size_t frames = tensors.front().frames;
    const std::size_t bins = tensors.front().bins;
    const std::size_t d = frames * bins;
    for (const auto& t : tensors)
        if (t.frames != frames || t.bins != bins)
            throw std::invalid_argument("tensors differ in shape");

    Standardizer s;
    s.frames = frames;
    s.bins = bins;
    s.mean.assign(d, 0.0);
    s.stddev.assign(d, 0.0);

    const double inv_n = 1.0 / static_cast<double>(tensors.size());
    for (const auto& t : tensors)
        for (std::size_t i = 0; i < d; ++i) s.mean[i] += t.values[i];
    for (double& m : s.mean) m *= inv_n;

    for (const auto& t : tensors)
        for (std::size_t i = 0; i < d; ++i) {
            const double delta = t.values[i] - s.mean[i];
            s.stddev[i] += delta * delta;
        }
    for (double& v : s.stddev) v = std::max(std::sqrt(v * inv_n), 1e-8);
    return s;
}

FeatureTensor apply_standardizer(const FeatureTensor& tensor, const Standardizer& s) {
    if (tensor.frames != s.frames || tensor.bins != s.bins)
        throw std::invalid_argument("tensor shape does not match the standardizer");
    FeatureTensor out = tensor;
    const std::size_t d = tensor.values.size();
    for (std::size_t i = 0; i < d; ++i)
        out.values[i] = (tensor.values[i] - s.mean[i]) / s.stddev[i];
    return out;
}

std::string standardizer_to_json(const Standardizer& s) {
    nlohmann::json j;
    j["frames"] = s.frames;
    j["bins"] = s.bins;
    j["mean"] = s.mean;
    j["stddev"] = s.stddev;
    return j.dump();
}

Standardizer standardizer_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("bad standardizer: " + std::string(e.what()));
    }
    Standardizer s;
    s.frames = j.at("frames").get<std::size_t>();
    s.bins = j.at("bins").get<std::size_t>();
    s.mean = j.at("mean").get<std::vector<double>>();
    s.stddev = j.at("stddev").get<std::vector<double>>();
    if (s.mean.size() != s.frames * s.bins || s.stddev.size() != s.mean.size())
        throw FormatError("standardizer arrays do not match the declared shape");
    return s;
}

void save_tensors(const std::filesystem::path& prefix,
                  const std::vector<FeatureTensor>& tensors,
                  const std::string& config_hash) {
    if (tensors.empty())
        throw std::invalid_argument("refusing to save an empty tensor batch");
    const std::size_t frames = tensors.front().frames;
    const std::size_t bins = tensors.front().bins;

    nlohmann::json sidecar;
    sidecar["count"] = tensors.size();
    sidecar["frames"] = frames;
    sidecar["bins"] = bins;
    sidecar["config_hash"] = config_hash;
    auto refs = nlohmann::json::array();
    for (const auto& t : tensors) {
        if (t.frames != frames || t.bins != bins)
            throw std::invalid_argument("tensors differ in shape");
        refs.push_back(t.event_ref);
    }
    sidecar["event_refs"] = refs;

    std::filesystem::path bin_path = prefix;
    bin_path += ".bin";
    std::filesystem::path json_path = prefix;
    json_path += ".json";

    std::ofstream bin(bin_path, std::ios::binary | std::ios::trunc);
    if (!bin) throw IoError("cannot open '" + bin_path.string() + "' for writing");
    for (const auto& t : tensors)
        bin.write(reinterpret_cast<const char*>(t.values.data()),
                  static_cast<std::streamsize>(t.values.size() * sizeof(double)));
    if (!bin) throw IoError("write failure on '" + bin_path.string() + "'");
    bin.close();

    std::ofstream js(json_path, std::ios::trunc);
    if (!js) throw IoError("cannot open '" + json_path.string() + "' for writing");
    js << sidecar.dump(2) << '\n';
    if (!js) throw IoError("write failure on '" + json_path.string() + "'");
}

std::vector<FeatureTensor> load_tensors(const std::filesystem::path& prefix,
                                        const std::string& expect_config_hash) {
    std::filesystem::path bin_path = prefix;
    bin_path += ".bin";
    std::filesystem::path json_path = prefix;
    json_path += ".json";

    std::ifstream js(json_path);
    if (!js) throw IoError("cannot open '" + json_path.string() + "'");
    nlohmann::json sidecar;
    try {
        js >> sidecar;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("bad tensor sidecar '" + json_path.string() + "': " + e.what());
    }

    const std::size_t count = sidecar.at("count").get<std::size_t>();
    const std::size_t frames = sidecar.at("frames").get<std::size_t>();
    const std::size_t bins = sidecar.at("bins").get<std::size_t>();
    const std::string hash = sidecar.at("config_hash").get<std::string>();
    if (!expect_config_hash.empty() && hash != expect_config_hash)
        throw FormatError("tensor batch '" + prefix.string() +
                          "' was produced under config " + hash +
                          ", expected " + expect_config_hash);

    std::ifstream bin(bin_path, std::ios::binary);
    if (!bin) throw IoError("cannot open '" + bin_path.string() + "'");

    const std::size_t d = frames * bins;
    std::vector<FeatureTensor> tensors(count);
    for (std::size_t i = 0; i < count; ++i) {
        tensors[i].frames = frames;
        tensors[i].bins = bins;
        tensors[i].values.resize(d);
        bin.read(reinterpret_cast<char*>(tensors[i].values.data()),
                 static_cast<std::streamsize>(d * sizeof(double)));
        if (!bin)
            throw FormatError("tensor data '" + bin_path.string() +
                              "' is shorter than its sidecar declares");
        tensors[i].event_ref = sidecar.at("event_refs").at(i).get<std::string>();
    }
    return tensors;
}

} // namespace roadnoise
