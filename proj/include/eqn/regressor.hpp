#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "eqn/corpus.hpp"
#include "eqn/featurize.hpp"

namespace eqn {

enum class Backend { linear, mlp };

std::string_view to_string(Backend backend);
Backend parse_backend(std::string_view name);

struct TrainConfig {
    std::size_t epochs = 30;
    /// Unset means the backend default: 0.05 for linear, 0.01 for mlp.
    std::optional<double> learning_rate;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;
    double l2 = 1e-4;
    std::size_t hidden_size = 256;
    /// Stop after this many epochs without a validation improvement; 0 disables.
    std::size_t patience = 0;
    double momentum = 0.9;

    double resolved_learning_rate(Backend backend) const;
    void validate() const;
};

void to_json(nlohmann::json& j, const TrainConfig& cfg);
void from_json(const nlohmann::json& j, TrainConfig& cfg);

/// Per-label linear regression: prediction_j = w_j . x + b_j.
struct LinearModel {
    std::size_t labels = 0;
    std::size_t dim = 0;
    std::vector<double> weights;  // labels x dim, row-major
    std::vector<double> biases;    // labels
    double l2 = 0.0;

    static LinearModel zeros(std::size_t dim, std::size_t labels, double l2);
};

/// One rectified hidden layer followed by a linear output layer of `labels` units.
struct MlpModel {
    std::size_t labels = 0;
    std::size_t dim = 0;
    std::size_t hidden = 0;
    std::vector<double> hidden_weights;  // hidden x dim, row-major
    std::vector<double> hidden_bias;     // hidden
    std::vector<double> output_weights;  // labels x hidden, row-major
    std::vector<double> output_bias;     // labels

    /// Hidden weights uniform in +-sqrt(6 / (dim + hidden)); everything else zero.
    static MlpModel initialize(std::size_t dim, std::size_t hidden, std::size_t labels,
                               std::uint64_t seed);
};

using Model = std::variant<LinearModel, MlpModel>;

Backend backend_of(const Model& model);
std::size_t label_count(const Model& model);
std::size_t input_dim(const Model& model);

/// Mutable views over every parameter array, in a fixed order.
std::vector<std::span<double>> parameter_blocks(LinearModel& model);
std::vector<std::span<double>> parameter_blocks(MlpModel& model);
/// Which of the blocks above carry the l2 penalty (weight matrices only).
std::vector<bool> penalized_blocks(const Model& model);

using Gradient = std::vector<std::vector<double>>;

/// Training objective over the samples listed in `batch`:
///   (1 / 2B) * sum_i (1/C) * sum_j (prediction_ij - target_ij)^2 + (l2/2) * |W|^2
/// When `grad` is non-null it receives the gradient, shaped like parameter_blocks().
double objective(const LinearModel& model, std::span<const FeatureVector> features,
                 std::span<const IntensityVector> targets, std::span<const std::size_t> batch,
                 double l2, Gradient* grad);
double objective(const MlpModel& model, std::span<const FeatureVector> features,
                 std::span<const IntensityVector> targets, std::span<const std::size_t> batch,
                 double l2, Gradient* grad);

/// Unpenalized loss over all samples; 0 for an empty set.
double mse_loss(const Model& model, std::span<const FeatureVector> features,
                std::span<const IntensityVector> targets);

/// Raw, unclamped prediction.
IntensityVector predict(const Model& model, const FeatureVector& x);

/// Order-preserving batch prediction, split across up to `threads` workers.
std::vector<IntensityVector> predict_all(const Model& model, std::span<const FeatureVector> features,
                                         std::size_t threads = 1);

struct TrainReport {
    std::vector<double> train_loss;
    std::vector<double> validation_loss;  // empty when no validation split
    std::size_t best_epoch = 0;
    double wall_seconds = 0.0;
};

void to_json(nlohmann::json& j, const TrainReport& report);

struct TrainResult {
    Model model;
    TrainReport report;
};

/// Mini-batch gradient descent with momentum. The returned model is the epoch
/// with the lowest validation loss (training loss when there is no validation
/// split). `warm_start`, when given, replaces the fresh initialization.
TrainResult train(std::span<const FeatureVector> features, std::span<const IntensityVector> targets,
                  std::span<const FeatureVector> val_features,
                  std::span<const IntensityVector> val_targets, const TrainConfig& cfg,
                  Backend backend, std::size_t dim, const Model* warm_start = nullptr);

/// Largest relative error between analytic gradients and central finite
/// differences (step 1e-5) over up to `max_params` randomly chosen parameters.
double gradient_check(const MlpModel& model, std::span<const FeatureVector> features,
                      std::span<const IntensityVector> targets, double l2 = 0.0,
                      std::uint64_t seed = 0, std::size_t max_params = 200);
double gradient_check(const LinearModel& model, std::span<const FeatureVector> features,
                      std::span<const IntensityVector> targets, std::uint64_t seed = 0,
                      std::size_t max_params = 200);

}  // namespace eqn
