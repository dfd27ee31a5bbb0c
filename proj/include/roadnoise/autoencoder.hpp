#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "roadnoise/features.hpp"

namespace roadnoise {

/// Fully-connected autoencoder scored by reconstruction MSE. The hidden
/// widths must be at least the input width (non-compressive). Hidden
/// layers use a leaky rectifier (slope 0.01), the output is linear.
struct AutoencoderModel {
    std::vector<std::size_t> dims; // input, hidden..., output
    // weights[l] is row-major [in][out] for the map dims[l] -> dims[l+1]
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
    std::uint64_t rng_seed = 0;
    double leaky_slope = 0.01;

    std::size_t input_size() const { return dims.empty() ? 0 : dims.front(); }
    std::size_t layer_count() const { return weights.size(); }
};

struct TrainConfig {
    std::size_t epochs = 200;
    std::size_t batch_size = 16;
    double learning_rate = 1e-3;
    std::uint64_t seed = 7;
    std::size_t early_stop_patience = 20; // epochs without val improvement

    void validate() const;
};

struct EpochStats {
    double train_mse = 0.0;
    double val_mse = 0.0; // NaN when no validation set was given
};

struct TrainResult {
    AutoencoderModel model;
    std::vector<EpochStats> history;
    std::size_t best_epoch = 0; // 0-based index into history
    std::size_t epochs_run = 0;
};

/// Glorot-uniform weights (s = sqrt(6/(fan_in+fan_out))), zero biases,
/// bit-deterministic for a given seed. Throws std::invalid_argument on a
/// broken dimension chain or a compressive hidden layer.
AutoencoderModel init_model(const std::vector<std::size_t>& dims, std::uint64_t seed);

/// Deterministic forward pass; output shape equals input shape.
FeatureTensor reconstruct(const AutoencoderModel& model, const FeatureTensor& tensor);

/// Mean over all cells of the squared difference.
double mse_score(const FeatureTensor& x, const FeatureTensor& x_hat);

/// Exact gradients of the batch-mean MSE loss with respect to every
/// parameter (same layout as the model), plus the loss itself. This is
/// the quantity the trainer steps along; exposed so it can be checked
/// against finite differences.
struct LossGradients {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
    double loss = 0.0;
};

LossGradients loss_gradients(const AutoencoderModel& model,
                             const std::vector<FeatureTensor>& batch);

/// Mini-batch gradient descent on mean reconstruction MSE with exact
/// backpropagation. Shuffle order is derived from config.seed, so the
/// whole run (loss history included) is reproducible bit-for-bit. With a
/// validation set, stops after `early_stop_patience` epochs without
/// improvement and returns the best-validation weights; without one, runs
/// all epochs. Throws TrainingDivergedError if the loss goes non-finite.
TrainResult train(const AutoencoderModel& model,
                  const std::vector<FeatureTensor>& train_tensors,
                  const std::vector<FeatureTensor>& val_tensors,
                  const TrainConfig& config);

/// Standardize each tensor, reconstruct, and score; order preserved.
std::vector<std::pair<std::string, double>> score_events(
    const AutoencoderModel& model, const Standardizer& standardizer,
    const std::vector<FeatureTensor>& tensors);

/// Versioned binary: magic/version, a JSON header (dims, seed, extras
/// such as the config hash), then raw parameters. Round-trips bit-exactly.
void save_model(const AutoencoderModel& model, const std::filesystem::path& path,
                const std::string& header_extra_json = "{}");
AutoencoderModel load_model(const std::filesystem::path& path,
                            std::string* header_extra_json = nullptr);

/// Loss history as CSV (epoch, train_mse, val_mse).
void save_loss_history(const std::vector<EpochStats>& history,
                       const std::filesystem::path& path,
                       const std::string& config_hash);

} // namespace roadnoise
