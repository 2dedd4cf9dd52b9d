#include "eqn/regressor.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <thread>

#include <fmt/format.h>

#include "eqn/error.hpp"
#include "eqn/log.hpp"

namespace eqn {

namespace {

double dot_row(std::span<const double> row, const FeatureVector& x) {
    double s = 0.0;
    for (const auto& [k, v] : x.entries()) s += row[k] * v;
    return s;
}

void check_shapes(std::span<const FeatureVector> features, std::span<const IntensityVector> targets,
                  std::size_t labels, std::size_t dim) {
    if (features.size() != targets.size()) {
        throw DataError(fmt::format("{} feature vectors but {} targets", features.size(),
                                    targets.size()));
    }
    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (targets[i].size() != labels) {
            throw DataError(fmt::format("target {} has {} values, expected {}", i, targets[i].size(),
                                        labels));
        }
        for (double v : targets[i]) {
            if (!std::isfinite(v)) throw DataError(fmt::format("target {} is not finite", i));
        }
        for (const auto& [k, v] : features[i].entries()) {
            if (k >= dim) throw DataError(fmt::format("feature index {} >= dim {}", k, dim));
        }
    }
}

Gradient zero_gradient(const std::vector<std::span<double>>& blocks) {
    Gradient g;
    g.reserve(blocks.size());
    for (auto b : blocks) g.emplace_back(b.size(), 0.0);
    return g;
}

void reset(Gradient& g) {
    for (auto& b : g) std::fill(b.begin(), b.end(), 0.0);
}

double penalty(std::span<const double> w, double l2, std::vector<double>* grad) {
    if (l2 == 0.0) return 0.0;
    double sq = 0.0;
    for (std::size_t p = 0; p < w.size(); ++p) {
        sq += w[p] * w[p];
        if (grad != nullptr) (*grad)[p] += l2 * w[p];
    }
    return 0.5 * l2 * sq;
}

double model_objective(const Model& model, std::span<const FeatureVector> features,
                       std::span<const IntensityVector> targets, std::span<const std::size_t> batch,
                       double l2, Gradient* grad) {
    return std::visit(
        [&](const auto& m) { return objective(m, features, targets, batch, l2, grad); }, model);
}

std::vector<std::span<double>> model_blocks(Model& model) {
    return std::visit([](auto& m) { return parameter_blocks(m); }, model);
}

double relative_error(double analytic, double numeric) {
    double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    return std::abs(analytic - numeric) / scale;
}

template <typename M>
double check_gradient(const M& model, std::span<const FeatureVector> features,
                      std::span<const IntensityVector> targets, double l2, std::uint64_t seed,
                      std::size_t max_params) {
    if (features.empty()) throw DataError("gradient_check needs a non-empty batch");
    check_shapes(features, targets, model.labels, model.dim);
    constexpr double kStep = 1e-5;

    std::vector<std::size_t> batch(features.size());
    std::iota(batch.begin(), batch.end(), std::size_t{0});

    M probe = model;
    auto blocks = parameter_blocks(probe);
    Gradient analytic = zero_gradient(blocks);
    objective(probe, features, targets, batch, l2, &analytic);

    std::vector<std::pair<std::size_t, std::size_t>> all;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        for (std::size_t p = 0; p < blocks[b].size(); ++p) all.emplace_back(b, p);
    }
    std::mt19937_64 rng(seed);
    if (all.size() > max_params) {
        std::shuffle(all.begin(), all.end(), rng);
        all.resize(max_params);
    }

    double worst = 0.0;
    for (auto [b, p] : all) {
        double original = blocks[b][p];
        blocks[b][p] = original + kStep;
        double up = objective(probe, features, targets, batch, l2, nullptr);
        blocks[b][p] = original - kStep;
        double down = objective(probe, features, targets, batch, l2, nullptr);
        blocks[b][p] = original;
        double numeric = (up - down) / (2.0 * kStep);
        worst = std::max(worst, relative_error(analytic[b][p], numeric));
    }
    return worst;
}

}  // namespace

std::string_view to_string(Backend backend) {
    return backend == Backend::linear ? "linear" : "mlp";
}

Backend parse_backend(std::string_view name) {
    if (name == "linear") return Backend::linear;
    if (name == "mlp") return Backend::mlp;
    throw ConfigError(fmt::format("unknown backend '{}' (expected linear or mlp)", name));
}

double TrainConfig::resolved_learning_rate(Backend backend) const {
    if (learning_rate) return *learning_rate;
    return backend == Backend::linear ? 0.05 : 0.01;
}

void TrainConfig::validate() const {
    if (epochs < 1) throw ConfigError("train.epochs must be >= 1");
    if (learning_rate && !(*learning_rate > 0.0)) throw ConfigError("train.learning_rate must be > 0");
    if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
    if (!(l2 >= 0.0)) throw ConfigError("train.l2 must be >= 0");
    if (hidden_size < 1) throw ConfigError("train.hidden_size must be >= 1");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("train.momentum must be in [0,1)");
}

void to_json(nlohmann::json& j, const TrainConfig& cfg) {
    j = nlohmann::json{{"epochs", cfg.epochs},
                       {"batch_size", cfg.batch_size},
                       {"seed", cfg.seed},
                       {"l2", cfg.l2},
                       {"hidden_size", cfg.hidden_size},
                       {"patience", cfg.patience},
                       {"momentum", cfg.momentum}};
    j["learning_rate"] = cfg.learning_rate ? nlohmann::json(*cfg.learning_rate) : nlohmann::json();
}

void from_json(const nlohmann::json& j, TrainConfig& cfg) {
    if (!j.is_object()) throw ConfigError("train config must be an object");
    for (const auto& [key, value] : j.items()) {
        if (key == "epochs") {
            cfg.epochs = value.get<std::size_t>();
        } else if (key == "learning_rate") {
            cfg.learning_rate =
                value.is_null() ? std::nullopt : std::optional<double>(value.get<double>());
        } else if (key == "batch_size") {
            cfg.batch_size = value.get<std::size_t>();
        } else if (key == "seed") {
            cfg.seed = value.get<std::uint64_t>();
        } else if (key == "l2") {
            cfg.l2 = value.get<double>();
        } else if (key == "hidden_size") {
            cfg.hidden_size = value.get<std::size_t>();
        } else if (key == "patience") {
            cfg.patience = value.get<std::size_t>();
        } else if (key == "momentum") {
            cfg.momentum = value.get<double>();
        } else {
            throw ConfigError("unknown train key: " + key);
        }
    }
    cfg.validate();
}

LinearModel LinearModel::zeros(std::size_t dim, std::size_t labels, double l2) {
    LinearModel m;
    m.labels = labels;
    m.dim = dim;
    m.weights.assign(labels * dim, 0.0);
    m.biases.assign(labels, 0.0);
    m.l2 = l2;
    return m;
}

MlpModel MlpModel::initialize(std::size_t dim, std::size_t hidden, std::size_t labels,
                              std::uint64_t seed) {
    MlpModel m;
    m.labels = labels;
    m.dim = dim;
    m.hidden = hidden;
    const double limit = std::sqrt(6.0 / static_cast<double>(dim + hidden));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(-limit, limit);
    m.hidden_weights.resize(hidden * dim);
    for (double& w : m.hidden_weights) w = uniform(rng);
    m.hidden_bias.assign(hidden, 0.0);
    m.output_weights.assign(labels * hidden, 0.0);
    m.output_bias.assign(labels, 0.0);
    return m;
}

Backend backend_of(const Model& model) {
    return std::holds_alternative<LinearModel>(model) ? Backend::linear : Backend::mlp;
}

std::size_t label_count(const Model& model) {
    return std::visit([](const auto& m) { return m.labels; }, model);
}

std::size_t input_dim(const Model& model) {
    return std::visit([](const auto& m) { return m.dim; }, model);
}

std::vector<std::span<double>> parameter_blocks(LinearModel& model) {
    return {model.weights, model.biases};
}

std::vector<std::span<double>> parameter_blocks(MlpModel& model) {
    return {model.hidden_weights, model.hidden_bias, model.output_weights, model.output_bias};
}

std::vector<bool> penalized_blocks(const Model& model) {
    if (std::holds_alternative<LinearModel>(model)) return {true, false};
    return {true, false, true, false};
}

double objective(const LinearModel& model, std::span<const FeatureVector> features,
                 std::span<const IntensityVector> targets, std::span<const std::size_t> batch,
                 double l2, Gradient* grad) {
    const std::size_t C = model.labels;
    const std::size_t D = model.dim;
    const double scale = 1.0 / (static_cast<double>(batch.size()) * static_cast<double>(C));
    std::span<const double> W = model.weights;

    double sq = 0.0;
    for (std::size_t i : batch) {
        const auto& x = features[i];
        const auto& y = targets[i];
        for (std::size_t j = 0; j < C; ++j) {
            double r = dot_row(W.subspan(j * D, D), x) + model.biases[j] - y[j];
            sq += r * r;
            if (grad != nullptr) {
                double d = r * scale;
                (*grad)[1][j] += d;
                auto& gw = (*grad)[0];
                for (const auto& [k, v] : x.entries()) gw[j * D + k] += d * v;
            }
        }
    }
    double loss = 0.5 * scale * sq;
    loss += penalty(W, l2, grad != nullptr ? &(*grad)[0] : nullptr);
    return loss;
}

double objective(const MlpModel& model, std::span<const FeatureVector> features,
                 std::span<const IntensityVector> targets, std::span<const std::size_t> batch,
                 double l2, Gradient* grad) {
    const std::size_t C = model.labels;
    const std::size_t D = model.dim;
    const std::size_t H = model.hidden;
    const double scale = 1.0 / (static_cast<double>(batch.size()) * static_cast<double>(C));
    std::span<const double> Wh = model.hidden_weights;
    std::span<const double> Wo = model.output_weights;

    std::vector<double> z(H);
    std::vector<double> a(H);
    std::vector<double> dout(C);
    std::vector<double> dz(H);
    double sq = 0.0;
    for (std::size_t i : batch) {
        const auto& x = features[i];
        const auto& y = targets[i];
        for (std::size_t h = 0; h < H; ++h) {
            z[h] = dot_row(Wh.subspan(h * D, D), x) + model.hidden_bias[h];
            a[h] = z[h] > 0.0 ? z[h] : 0.0;
        }
        for (std::size_t j = 0; j < C; ++j) {
            double out = model.output_bias[j];
            for (std::size_t h = 0; h < H; ++h) out += Wo[j * H + h] * a[h];
            double r = out - y[j];
            sq += r * r;
            dout[j] = r * scale;
        }
        if (grad == nullptr) continue;
        auto& g_hw = (*grad)[0];
        auto& g_hb = (*grad)[1];
        auto& g_ow = (*grad)[2];
        auto& g_ob = (*grad)[3];
        std::fill(dz.begin(), dz.end(), 0.0);
        for (std::size_t j = 0; j < C; ++j) {
            g_ob[j] += dout[j];
            for (std::size_t h = 0; h < H; ++h) {
                g_ow[j * H + h] += dout[j] * a[h];
                dz[h] += Wo[j * H + h] * dout[j];
            }
        }
        for (std::size_t h = 0; h < H; ++h) {
            if (z[h] <= 0.0) continue;
            g_hb[h] += dz[h];
            for (const auto& [k, v] : x.entries()) g_hw[h * D + k] += dz[h] * v;
        }
    }
    double loss = 0.5 * scale * sq;
    loss += penalty(Wh, l2, grad != nullptr ? &(*grad)[0] : nullptr);
    loss += penalty(Wo, l2, grad != nullptr ? &(*grad)[2] : nullptr);
    return loss;
}

double mse_loss(const Model& model, std::span<const FeatureVector> features,
                std::span<const IntensityVector> targets) {
    if (features.empty()) return 0.0;
    std::vector<std::size_t> all(features.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return model_objective(model, features, targets, all, 0.0, nullptr);
}

IntensityVector predict(const Model& model, const FeatureVector& x) {
    if (const auto* lin = std::get_if<LinearModel>(&model)) {
        IntensityVector out(lin->labels);
        std::span<const double> W = lin->weights;
        for (std::size_t j = 0; j < lin->labels; ++j) {
            out[j] = dot_row(W.subspan(j * lin->dim, lin->dim), x) + lin->biases[j];
        }
        return out;
    }
    const auto& mlp = std::get<MlpModel>(model);
    std::span<const double> Wh = mlp.hidden_weights;
    std::vector<double> a(mlp.hidden);
    for (std::size_t h = 0; h < mlp.hidden; ++h) {
        double z = dot_row(Wh.subspan(h * mlp.dim, mlp.dim), x) + mlp.hidden_bias[h];
        a[h] = z > 0.0 ? z : 0.0;
    }
    IntensityVector out(mlp.labels);
    for (std::size_t j = 0; j < mlp.labels; ++j) {
        double s = mlp.output_bias[j];
        for (std::size_t h = 0; h < mlp.hidden; ++h) s += mlp.output_weights[j * mlp.hidden + h] * a[h];
        out[j] = s;
    }
    return out;
}

std::vector<IntensityVector> predict_all(const Model& model, std::span<const FeatureVector> features,
                                         std::size_t threads) {
    std::vector<IntensityVector> out(features.size());
    threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(1, features.size()));
    if (threads == 1) {
        for (std::size_t i = 0; i < features.size(); ++i) out[i] = predict(model, features[i]);
        return out;
    }
    const std::size_t chunk = (features.size() + threads - 1) / threads;
    std::vector<std::jthread> workers;
    for (std::size_t t = 0; t < threads; ++t) {
        std::size_t begin = t * chunk;
        std::size_t end = std::min(features.size(), begin + chunk);
        if (begin >= end) break;
        workers.emplace_back([&, begin, end] {
            for (std::size_t i = begin; i < end; ++i) out[i] = predict(model, features[i]);
        });
    }
    return out;
}

void to_json(nlohmann::json& j, const TrainReport& report) {
    j = nlohmann::json{{"train_loss", report.train_loss},
                       {"validation_loss", report.validation_loss},
                       {"best_epoch", report.best_epoch},
                       {"epochs_run", report.train_loss.size()}};
}

TrainResult train(std::span<const FeatureVector> features, std::span<const IntensityVector> targets,
                  std::span<const FeatureVector> val_features,
                  std::span<const IntensityVector> val_targets, const TrainConfig& cfg,
                  Backend backend, std::size_t dim, const Model* warm_start) {
    cfg.validate();
    if (features.empty()) throw DataError("cannot train on an empty training set");
    const std::size_t labels = targets.front().size();
    check_shapes(features, targets, labels, dim);
    check_shapes(val_features, val_targets, labels, dim);
    if (cfg.patience > 0 && val_features.empty()) {
        throw ConfigError("early stopping (patience > 0) needs a non-empty validation split");
    }

    const auto start = std::chrono::steady_clock::now();
    const double lr = cfg.resolved_learning_rate(backend);

    Model model;
    if (warm_start != nullptr) {
        if (backend_of(*warm_start) != backend || label_count(*warm_start) != labels ||
            input_dim(*warm_start) != dim) {
            throw ConfigError("warm-start model does not match backend, labels, or dim");
        }
        model = *warm_start;
    } else if (backend == Backend::linear) {
        model = LinearModel::zeros(dim, labels, cfg.l2);
    } else {
        model = MlpModel::initialize(dim, cfg.hidden_size, labels, cfg.seed);
    }
    if (auto* lin = std::get_if<LinearModel>(&model)) lin->l2 = cfg.l2;

    auto blocks = model_blocks(model);
    Gradient grad = zero_gradient(blocks);
    Gradient velocity = zero_gradient(blocks);

    std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<std::size_t> order(features.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    TrainReport report;
    Model best = model;
    double best_loss = std::numeric_limits<double>::infinity();
    std::size_t since_best = 0;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
            std::size_t end = std::min(order.size(), begin + cfg.batch_size);
            std::span<const std::size_t> batch(order.data() + begin, end - begin);
            reset(grad);
            double loss = model_objective(model, features, targets, batch, cfg.l2, &grad);
            if (!std::isfinite(loss)) {
                throw NumericalError(fmt::format(
                    "training diverged in epoch {} (non-finite loss); lower the learning rate "
                    "(currently {})",
                    epoch, lr));
            }
            for (std::size_t b = 0; b < blocks.size(); ++b) {
                auto& v = velocity[b];
                const auto& g = grad[b];
                auto theta = blocks[b];
                for (std::size_t p = 0; p < theta.size(); ++p) {
                    v[p] = cfg.momentum * v[p] - lr * g[p];
                    theta[p] += v[p];
                }
            }
        }

        double train_loss = mse_loss(model, features, targets);
        double val_loss = val_features.empty() ? train_loss : mse_loss(model, val_features, val_targets);
        if (!std::isfinite(train_loss) || !std::isfinite(val_loss)) {
            throw NumericalError(fmt::format(
                "training diverged in epoch {} (non-finite loss); lower the learning rate "
                "(currently {})",
                epoch, lr));
        }
        report.train_loss.push_back(train_loss);
        if (!val_features.empty()) report.validation_loss.push_back(val_loss);
        log::debug("epoch {}: train {:.6f} validation {:.6f}", epoch, train_loss, val_loss);

        if (val_loss < best_loss) {
            best_loss = val_loss;
            best = model;
            report.best_epoch = epoch;
            since_best = 0;
        } else if (cfg.patience > 0 && ++since_best >= cfg.patience) {
            log::info("early stop after epoch {} (best epoch {})", epoch, report.best_epoch);
            break;
        }
    }

    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {std::move(best), std::move(report)};
}

double gradient_check(const MlpModel& model, std::span<const FeatureVector> features,
                      std::span<const IntensityVector> targets, double l2, std::uint64_t seed,
                      std::size_t max_params) {
    return check_gradient(model, features, targets, l2, seed, max_params);
}

double gradient_check(const LinearModel& model, std::span<const FeatureVector> features,
                      std::span<const IntensityVector> targets, std::uint64_t seed,
                      std::size_t max_params) {
    return check_gradient(model, features, targets, model.l2, seed, max_params);
}

}  // namespace eqn
