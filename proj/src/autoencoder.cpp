#include "roadnoise/autoencoder.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "roadnoise/errors.hpp"
#include "roadnoise/rng.hpp"

namespace roadnoise {

namespace {

void axpy(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

// four independent accumulators keep the reduction pipelined without
// reassociating the final sum order
double dot(const double* x, const double* y, std::size_t n) {
    double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        a0 += x[i] * y[i];
        a1 += x[i + 1] * y[i + 1];
        a2 += x[i + 2] * y[i + 2];
        a3 += x[i + 3] * y[i + 3];
    }
    for (; i < n; ++i) a0 += x[i] * y[i];
    return (a0 + a1) + (a2 + a3);
}

/// Scratch space for one batch pass through the network.
struct BatchWorkspace {
    // pre[l], act[l]: B x dims[l+1] pre-activations / activations
    std::vector<std::vector<double>> pre;
    std::vector<std::vector<double>> act;
    std::vector<std::vector<double>> grad; // same shapes as pre
    std::vector<std::vector<double>> dw;   // per layer, like weights
    std::vector<std::vector<double>> db;

    void resize(const AutoencoderModel& m, std::size_t batch) {
        const std::size_t layers = m.layer_count();
        pre.resize(layers);
        act.resize(layers);
        grad.resize(layers);
        dw.resize(layers);
        db.resize(layers);
        for (std::size_t l = 0; l < layers; ++l) {
            pre[l].assign(batch * m.dims[l + 1], 0.0);
            act[l].assign(batch * m.dims[l + 1], 0.0);
            grad[l].assign(batch * m.dims[l + 1], 0.0);
            dw[l].assign(m.weights[l].size(), 0.0);
            db[l].assign(m.biases[l].size(), 0.0);
        }
    }
};

// weight-row chunk sized so a chunk stays cache-resident across the
// whole batch; accumulation order per output element is unchanged
constexpr std::size_t kRowChunk = 64;

/// Forward pass for `batch` rows stored contiguously in `input`
/// (batch x dims[0]). Fills ws.pre/ws.act.
void forward_batch(const AutoencoderModel& m, const double* input,
                   std::size_t batch, BatchWorkspace& ws) {
    const std::size_t layers = m.layer_count();
    for (std::size_t l = 0; l < layers; ++l) {
        const std::size_t in_dim = m.dims[l];
        const std::size_t out_dim = m.dims[l + 1];
        const double* src = l == 0 ? input : ws.act[l - 1].data();
        double* z = ws.pre[l].data();

        for (std::size_t b = 0; b < batch; ++b)
            std::memcpy(z + b * out_dim, m.biases[l].data(), out_dim * sizeof(double));
        for (std::size_t i0 = 0; i0 < in_dim; i0 += kRowChunk) {
            const std::size_t i1 = std::min(i0 + kRowChunk, in_dim);
            for (std::size_t b = 0; b < batch; ++b) {
                double* zb = z + b * out_dim;
                for (std::size_t i = i0; i < i1; ++i) {
                    const double a = src[b * in_dim + i];
                    if (a != 0.0)
                        axpy(a, m.weights[l].data() + i * out_dim, zb, out_dim);
                }
            }
        }

        double* a_out = ws.act[l].data();
        if (l + 1 == layers) {
            std::memcpy(a_out, z, batch * out_dim * sizeof(double));
        } else {
            const double slope = m.leaky_slope;
            for (std::size_t i = 0; i < batch * out_dim; ++i)
                a_out[i] = z[i] > 0.0 ? z[i] : slope * z[i];
        }
    }
}

/// Backward pass for the mean-MSE loss over the batch; expects
/// forward_batch to have run. Leaves weight gradients in ws.dw/ws.db.
/// Returns the batch loss.
double backward_batch(const AutoencoderModel& m, const double* input,
                      std::size_t batch, BatchWorkspace& ws) {
    const std::size_t layers = m.layer_count();
    const std::size_t d = m.dims.back();
    const double* out = ws.act[layers - 1].data();

    double loss = 0.0;
    {
        double* g = ws.grad[layers - 1].data();
        const double scale = 2.0 / static_cast<double>(batch * d);
        for (std::size_t i = 0; i < batch * d; ++i) {
            const double diff = out[i] - input[i];
            loss += diff * diff;
            g[i] = scale * diff;
        }
        loss /= static_cast<double>(batch * d);
    }

    for (std::size_t l = layers; l-- > 0;) {
        const std::size_t in_dim = m.dims[l];
        const std::size_t out_dim = m.dims[l + 1];
        const double* src = l == 0 ? input : ws.act[l - 1].data();
        const double* g = ws.grad[l].data();

        std::fill(ws.dw[l].begin(), ws.dw[l].end(), 0.0);
        std::fill(ws.db[l].begin(), ws.db[l].end(), 0.0);

        double* db = ws.db[l].data();
        for (std::size_t b = 0; b < batch; ++b)
            axpy(1.0, g + b * out_dim, db, out_dim);

        for (std::size_t i0 = 0; i0 < in_dim; i0 += kRowChunk) {
            const std::size_t i1 = std::min(i0 + kRowChunk, in_dim);
            for (std::size_t b = 0; b < batch; ++b) {
                const double* gb = g + b * out_dim;
                for (std::size_t i = i0; i < i1; ++i) {
                    const double a = src[b * in_dim + i];
                    if (a != 0.0)
                        axpy(a, gb, ws.dw[l].data() + i * out_dim, out_dim);
                }
            }
        }

        if (l > 0) {
            double* g_prev = ws.grad[l - 1].data();
            const double* z_prev = ws.pre[l - 1].data();
            const double slope = m.leaky_slope;
            for (std::size_t i0 = 0; i0 < in_dim; i0 += kRowChunk) {
                const std::size_t i1 = std::min(i0 + kRowChunk, in_dim);
                for (std::size_t b = 0; b < batch; ++b) {
                    const double* gb = g + b * out_dim;
                    for (std::size_t i = i0; i < i1; ++i)
                        g_prev[b * in_dim + i] =
                            dot(gb, m.weights[l].data() + i * out_dim, out_dim);
                }
            }
            for (std::size_t i = 0; i < batch * in_dim; ++i)
                g_prev[i] *= z_prev[i] > 0.0 ? 1.0 : slope;
        }
    }
    return loss;
}

void check_tensor_shape(const AutoencoderModel& m, const FeatureTensor& t) {
    if (t.values.size() != m.input_size())
        throw std::invalid_argument(
            "tensor size " + std::to_string(t.values.size()) +
            " does not match model input " + std::to_string(m.input_size()));
}

double full_set_mse(const AutoencoderModel& m,
                    const std::vector<FeatureTensor>& tensors,
                    BatchWorkspace& ws) {
    if (tensors.empty()) return std::numeric_limits<double>::quiet_NaN();
    const std::size_t d = m.input_size();
    double total = 0.0;
    std::vector<double> row(d);
    for (const auto& t : tensors) {
        std::memcpy(row.data(), t.values.data(), d * sizeof(double));
        forward_batch(m, row.data(), 1, ws);
        const double* out = ws.act[m.layer_count() - 1].data();
        double acc = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            const double diff = out[i] - row[i];
            acc += diff * diff;
        }
        total += acc / static_cast<double>(d);
    }
    return total / static_cast<double>(tensors.size());
}

} // namespace

void TrainConfig::validate() const {
    if (epochs == 0) throw std::invalid_argument("epochs must be positive");
    if (batch_size == 0) throw std::invalid_argument("batch_size must be positive");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
        throw std::invalid_argument("learning_rate must be finite and >= 0");
}

AutoencoderModel init_model(const std::vector<std::size_t>& dims, std::uint64_t seed) {
    if (dims.size() < 2)
        throw std::invalid_argument("model needs at least input and output layers");
    for (std::size_t d : dims)
        if (d == 0) throw std::invalid_argument("layer widths must be positive");
    if (dims.front() != dims.back())
        throw std::invalid_argument("autoencoder output width must equal input width");
    for (std::size_t l = 1; l + 1 < dims.size(); ++l)
        if (dims[l] < dims.front())
            throw std::invalid_argument(
                "hidden width " + std::to_string(dims[l]) +
                " is below the input width (model must be non-compressive)");

    AutoencoderModel m;
    m.dims = dims;
    m.rng_seed = seed;
    Rng rng(seed);
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const std::size_t fan_in = dims[l];
        const std::size_t fan_out = dims[l + 1];
        const double s = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        std::vector<double> w(fan_in * fan_out);
        for (double& v : w) v = rng.uniform(-s, s);
        m.weights.push_back(std::move(w));
        m.biases.emplace_back(fan_out, 0.0);
    }
    return m;
}

FeatureTensor reconstruct(const AutoencoderModel& model, const FeatureTensor& tensor) {
    check_tensor_shape(model, tensor);
    BatchWorkspace ws;
    ws.resize(model, 1);
    forward_batch(model, tensor.values.data(), 1, ws);
    FeatureTensor out = tensor;
    const double* y = ws.act[model.layer_count() - 1].data();
    std::copy(y, y + tensor.values.size(), out.values.begin());
    return out;
}

double mse_score(const FeatureTensor& x, const FeatureTensor& x_hat) {
    if (x.frames != x_hat.frames || x.bins != x_hat.bins ||
        x.values.size() != x_hat.values.size())
        throw std::invalid_argument("mse_score requires tensors of identical shape");
    double acc = 0.0;
    for (std::size_t i = 0; i < x.values.size(); ++i) {
        const double diff = x.values[i] - x_hat.values[i];
        acc += diff * diff;
    }
    return acc / static_cast<double>(x.values.size());
}

LossGradients loss_gradients(const AutoencoderModel& model,
                             const std::vector<FeatureTensor>& batch) {
    if (batch.empty())
        throw std::invalid_argument("gradient of an empty batch");
    for (const auto& t : batch) check_tensor_shape(model, t);

    const std::size_t d = model.input_size();
    std::vector<double> input(batch.size() * d);
    for (std::size_t b = 0; b < batch.size(); ++b)
        std::memcpy(input.data() + b * d, batch[b].values.data(),
                    d * sizeof(double));

    BatchWorkspace ws;
    ws.resize(model, batch.size());
    forward_batch(model, input.data(), batch.size(), ws);
    LossGradients out;
    out.loss = backward_batch(model, input.data(), batch.size(), ws);
    out.weights = std::move(ws.dw);
    out.biases = std::move(ws.db);
    return out;
}

TrainResult train(const AutoencoderModel& model,
                  const std::vector<FeatureTensor>& train_tensors,
                  const std::vector<FeatureTensor>& val_tensors,
                  const TrainConfig& config) {
    config.validate();
    if (train_tensors.empty())
        throw std::invalid_argument("training set is empty");
    for (const auto& t : train_tensors) check_tensor_shape(model, t);
    for (const auto& t : val_tensors) check_tensor_shape(model, t);

    const std::size_t n = train_tensors.size();
    const std::size_t d = model.input_size();
    const std::size_t batch_cap = std::min(config.batch_size, n);

    TrainResult result;
    result.model = model;
    AutoencoderModel& m = result.model;

    BatchWorkspace ws;
    ws.resize(m, batch_cap);
    std::vector<double> batch_input(batch_cap * d);

    AutoencoderModel best = m;
    double best_val = std::numeric_limits<double>::infinity();
    std::size_t best_epoch = 0;
    std::size_t stale_epochs = 0;
    const bool use_val = !val_tensors.empty();

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        Rng shuffle_rng(Rng::derive_seed(config.seed, epoch));
        const std::vector<std::size_t> order = shuffle_rng.permutation(n);

        double loss_sum = 0.0;
        for (std::size_t start = 0; start < n; start += batch_cap) {
            const std::size_t batch = std::min(batch_cap, n - start);
            for (std::size_t b = 0; b < batch; ++b)
                std::memcpy(batch_input.data() + b * d,
                            train_tensors[order[start + b]].values.data(),
                            d * sizeof(double));

            forward_batch(m, batch_input.data(), batch, ws);
            const double batch_loss = backward_batch(m, batch_input.data(), batch, ws);
            if (!std::isfinite(batch_loss))
                throw TrainingDivergedError(
                    "loss became non-finite at epoch " + std::to_string(epoch));
            loss_sum += batch_loss * static_cast<double>(batch);

            if (config.learning_rate != 0.0) {
                for (std::size_t l = 0; l < m.layer_count(); ++l) {
                    axpy(-config.learning_rate, ws.dw[l].data(),
                         m.weights[l].data(), m.weights[l].size());
                    axpy(-config.learning_rate, ws.db[l].data(),
                         m.biases[l].data(), m.biases[l].size());
                }
            }
        }

        EpochStats stats;
        stats.train_mse = loss_sum / static_cast<double>(n);
        stats.val_mse = use_val ? full_set_mse(m, val_tensors, ws)
                                : std::numeric_limits<double>::quiet_NaN();
        result.history.push_back(stats);

        if (use_val) {
            if (stats.val_mse < best_val) {
                best_val = stats.val_mse;
                best = m;
                best_epoch = epoch;
                stale_epochs = 0;
            } else if (++stale_epochs >= config.early_stop_patience) {
                break;
            }
        }
    }

    result.epochs_run = result.history.size();
    if (use_val) {
        result.model = std::move(best);
        result.best_epoch = best_epoch;
    } else {
        result.best_epoch = result.epochs_run == 0 ? 0 : result.epochs_run - 1;
    }
    return result;
}

std::vector<std::pair<std::string, double>> score_events(
    const AutoencoderModel& model, const Standardizer& standardizer,
    const std::vector<FeatureTensor>& tensors) {
    std::vector<std::pair<std::string, double>> scores;
    scores.reserve(tensors.size());
    for (const auto& t : tensors) {
        const FeatureTensor z = apply_standardizer(t, standardizer);
        const FeatureTensor rec = reconstruct(model, z);
        scores.emplace_back(t.event_ref, mse_score(z, rec));
    }
    return scores;
}

namespace {
constexpr char kModelMagic[4] = {'R', 'N', 'A', 'E'};
constexpr std::uint32_t kModelVersion = 1;
} // namespace

void save_model(const AutoencoderModel& model, const std::filesystem::path& path,
                const std::string& header_extra_json) {
    nlohmann::json header;
    header["dims"] = model.dims;
    header["seed"] = model.rng_seed;
    header["leaky_slope"] = model.leaky_slope;
    header["extra"] = nlohmann::json::parse(header_extra_json);
    const std::string header_str = header.dump();

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");

    out.write(kModelMagic, 4);
    const std::uint32_t version = kModelVersion;
    out.write(reinterpret_cast<const char*>(&version), 4);
    const std::uint64_t header_len = header_str.size();
    out.write(reinterpret_cast<const char*>(&header_len), 8);
    out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));
    for (std::size_t l = 0; l < model.layer_count(); ++l) {
        out.write(reinterpret_cast<const char*>(model.weights[l].data()),
                  static_cast<std::streamsize>(model.weights[l].size() * sizeof(double)));
        out.write(reinterpret_cast<const char*>(model.biases[l].data()),
                  static_cast<std::streamsize>(model.biases[l].size() * sizeof(double)));
    }
    if (!out) throw IoError("write failure on '" + path.string() + "'");
}

AutoencoderModel load_model(const std::filesystem::path& path,
                            std::string* header_extra_json) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");

    char magic[4];
    std::uint32_t version = 0;
    std::uint64_t header_len = 0;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&version), 4);
    in.read(reinterpret_cast<char*>(&header_len), 8);
    if (!in || std::memcmp(magic, kModelMagic, 4) != 0)
        throw FormatError("'" + path.string() + "' is not a model file");
    if (version != kModelVersion)
        throw FormatError("model version " + std::to_string(version) +
                          " is not supported");

    std::string header_str(header_len, '\0');
    in.read(header_str.data(), static_cast<std::streamsize>(header_len));
    if (!in) throw FormatError("truncated model header in '" + path.string() + "'");

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(header_str);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("bad model header: " + std::string(e.what()));
    }

    AutoencoderModel m;
    m.dims = header.at("dims").get<std::vector<std::size_t>>();
    m.rng_seed = header.at("seed").get<std::uint64_t>();
    m.leaky_slope = header.at("leaky_slope").get<double>();
    if (header_extra_json) *header_extra_json = header.at("extra").dump();

    if (m.dims.size() < 2)
        throw FormatError("model header declares fewer than two layers");
    for (std::size_t l = 0; l + 1 < m.dims.size(); ++l) {
        std::vector<double> w(m.dims[l] * m.dims[l + 1]);
        std::vector<double> b(m.dims[l + 1]);
        in.read(reinterpret_cast<char*>(w.data()),
                static_cast<std::streamsize>(w.size() * sizeof(double)));
        in.read(reinterpret_cast<char*>(b.data()),
                static_cast<std::streamsize>(b.size() * sizeof(double)));
        if (!in) throw FormatError("truncated parameters in '" + path.string() + "'");
        m.weights.push_back(std::move(w));
        m.biases.push_back(std::move(b));
    }
    return m;
}

void save_loss_history(const std::vector<EpochStats>& history,
                       const std::filesystem::path& path,
                       const std::string& config_hash) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << "# config_hash=" << config_hash << "\n";
    out << "epoch,train_mse,val_mse\n";
    out.precision(17);
    for (std::size_t e = 0; e < history.size(); ++e)
        out << e << ',' << history[e].train_mse << ',' << history[e].val_mse << "\n";
    if (!out) throw IoError("write failure on '" + path.string() + "'");
}

} // namespace roadnoise
