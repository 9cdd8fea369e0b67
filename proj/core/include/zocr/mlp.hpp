#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "zocr/zoning.hpp"

namespace zocr {

/// Fully connected layer: weights are fan_out x fan_in, row-major.
struct DenseLayer {
    std::size_t fan_in = 0;
    std::size_t fan_out = 0;
    std::vector<double> weights;
    std::vector<double> biases;

    DenseLayer() = default;
    DenseLayer(std::size_t in, std::size_t out)
        : fan_in(in), fan_out(out), weights(in * out, 0.0), biases(out, 0.0) {}

    double& w(std::size_t row, std::size_t col) { return weights[row * fan_in + col]; }
    double w(std::size_t row, std::size_t col) const { return weights[row * fan_in + col]; }

    friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// Input, two sigmoid hidden layers, sigmoid output; trained on MSE.
struct MlpModel {
    static constexpr int kSchemaVersion = 1;

    std::array<std::size_t, 4> layer_sizes{};
    std::array<DenseLayer, 3> layers;
    std::uint64_t init_seed = 0;

    // Metadata carried in the model file so `predict` can rebuild features.
    GridSpec feature_grid{4, 4};
    std::vector<ClassInfo> classes;

    std::size_t inputs() const noexcept { return layer_sizes[0]; }
    std::size_t outputs() const noexcept { return layer_sizes[3]; }
    static constexpr const char* activation() noexcept { return "sigmoid"; }

    friend bool operator==(const MlpModel&, const MlpModel&) = default;
};

/// Weights ~ U[-1/sqrt(fan_in), +1/sqrt(fan_in)] drawn from mt19937_64(seed),
/// layer by layer in row-major order; biases zero.
MlpModel mlp_init(std::size_t h1, std::size_t h2, std::uint64_t seed, std::size_t inputs = 16,
                  std::size_t outputs = 44);

double sigmoid(double z) noexcept;

/// activations[0] is the input, activations[3] the output layer.
using Activations = std::array<std::vector<double>, 4>;

Activations mlp_forward(const MlpModel& m, std::span<const double> x);

/// (1/n) * sum_j (out_j - onehot(target)_j)^2.
double mlp_loss(std::span<const double> output, ClassId target);

struct MlpGradients {
    std::array<DenseLayer, 3> layers;

    double l2_norm() const noexcept;
};

/// Analytic gradient of mlp_loss(mlp_forward(m, x).back(), target).
MlpGradients mlp_backprop(const MlpModel& m, std::span<const double> x, ClassId target);

/// Index of the largest output; ties to the smallest index.
ClassId mlp_predict(const MlpModel& m, std::span<const double> x);

/// Central differences against mlp_backprop over every weight and bias.
/// Returns max |a - n| / max(|a|, |n|, 1e-8).
double finite_difference_check(const MlpModel& m, std::span<const double> x, ClassId target, double eps);

struct TrainHyperparams {
    double learning_rate = 10.0;
    int epochs = 500;
    std::uint64_t shuffle_seed = 42;
    std::uint64_t init_seed = 42;
    std::size_t h1 = 32;
    std::size_t h2 = 32;

    void validate() const;
};

struct EpochRecord {
    int epoch = 0;
    double mse = 0.0;        // mean loss over the training set after the epoch
    double grad_norm = 0.0;  // L2 norm of the last sample's gradient
    double seconds = 0.0;    // cumulative wall time since training started
};

struct TrainingTrace {
    std::vector<EpochRecord> epochs;
};

/// Called after each epoch with the current weights; used for snapshots.
using EpochCallback = std::function<void(const EpochRecord&, const MlpModel&)>;

struct TrainResult {
    MlpModel model;
    TrainingTrace trace;
};

/// Per-sample SGD. Row order is reshuffled every epoch by one mt19937_64
/// seeded with shuffle_seed and carried across epochs.
TrainResult mlp_train(MlpModel m, const FeatureTable& train, const TrainHyperparams& hp,
                      const EpochCallback& on_epoch = {});

/// Mean loss over all rows of a table.
double mlp_mean_loss(const MlpModel& m, const FeatureTable& table);

std::string mlp_to_json(const MlpModel& m);
MlpModel mlp_from_json(const std::string& text);
void save_mlp_model(const std::filesystem::path& path, const MlpModel& m);
MlpModel load_mlp_model(const std::filesystem::path& path);

/// `epoch,mse,grad_norm,seconds`
void write_trace_csv(const std::filesystem::path& path, const TrainingTrace& trace);

}  // namespace zocr
