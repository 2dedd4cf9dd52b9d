#include "eqn/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "eqn/csv.hpp"
#include "eqn/error.hpp"
#include "eqn/eval.hpp"
#include "eqn/hash.hpp"
#include "eqn/log.hpp"

namespace eqn {

namespace {

std::string_view to_string(Resampling r) {
    switch (r) {
        case Resampling::off: return "off";
        case Resampling::oversample: return "oversample";
        case Resampling::undersample: return "undersample";
    }
    return "off";
}

Resampling parse_resampling(std::string_view name) {
    if (name == "off") return Resampling::off;
    if (name == "oversample") return Resampling::oversample;
    if (name == "undersample") return Resampling::undersample;
    throw ConfigError(fmt::format("unknown resampling '{}'", name));
}

// Runs one pipeline step, prefixing any error with the step name while
// keeping its category.
template <typename F>
auto step(std::string_view name, F&& fn) {
    try {
        return fn();
    } catch (const NumericalError& e) {
        throw NumericalError(fmt::format("{}: {}", name, e.what()));
    } catch (const ConfigError& e) {
        throw ConfigError(fmt::format("{}: {}", name, e.what()));
    } catch (const DataError& e) {
        throw DataError(fmt::format("{}: {}", name, e.what()));
    }
}

void require_same_vocab(const Dataset& a, const Dataset& b, std::string_view what) {
    if (!(a.vocab == b.vocab)) {
        throw DataError(fmt::format("label vocabulary of the {} set does not match the training set", what));
    }
}

struct TrainingSet {
    std::vector<FeatureVector> features;
    std::vector<IntensityVector> targets;
};

TrainingSet gather(const std::vector<FeatureVector>& features, const std::vector<IntensityVector>& targets,
                   std::span<const std::size_t> indices) {
    TrainingSet out;
    out.features.reserve(indices.size());
    out.targets.reserve(indices.size());
    for (auto i : indices) {
        out.features.push_back(features[i]);
        out.targets.push_back(targets[i]);
    }
    return out;
}

// Everything Model 1 and Model 2 share: features, split, resampling.
struct Prepared {
    IdfTable idf;
    std::vector<FeatureVector> train_features;
    std::vector<std::size_t> fit;
    std::vector<FeatureVector> val_features;
    std::vector<std::size_t> val;  // indices into train, when split from it
    const Dataset* external_validation = nullptr;
};

Prepared prepare(const Dataset& train, const PipelineConfig& cfg, const Dataset* validation) {
    Prepared p;
    if (cfg.featurizer.weighting == Weighting::tfidf) p.idf = fit_idf(train, cfg.featurizer);
    const IdfTable* idf = cfg.featurizer.weighting == Weighting::tfidf ? &p.idf : nullptr;
    p.train_features = featurize_all(train, cfg.featurizer, idf);

    std::vector<std::size_t> fit;
    if (validation != nullptr) {
        fit.resize(train.size());
        std::iota(fit.begin(), fit.end(), std::size_t{0});
        p.external_validation = validation;
        p.val_features = featurize_all(*validation, cfg.featurizer, idf);
    } else {
        auto split = split_validation(train.size(), cfg.validation_fraction, cfg.train.seed);
        fit = std::move(split.fit);
        p.val = std::move(split.validation);
        for (auto i : p.val) p.val_features.push_back(p.train_features[i]);
    }
    if (fit.empty()) throw DataError("no training samples left after the validation split");
    p.fit = resample(train, fit, cfg.resampling, cfg.train.seed);
    return p;
}

TrainResult fit_model(const Prepared& p, const std::vector<IntensityVector>& train_targets,
                      const std::vector<IntensityVector>& val_targets, const PipelineConfig& cfg,
                      const Model* warm_start) {
    auto fit = gather(p.train_features, train_targets, p.fit);
    return train(fit.features, fit.targets, p.val_features, val_targets, cfg.train, cfg.backend,
                 cfg.featurizer.dim, warm_start);
}

std::vector<IntensityVector> initial_targets(const Dataset& ds) {
    std::vector<IntensityVector> out;
    out.reserve(ds.size());
    for (const auto& s : ds.samples) out.push_back(init_full_labels(s.gold, ds.vocab.size()));
    return out;
}

std::vector<IntensityVector> targets_of(const Dataset& ds) {
    std::vector<IntensityVector> out;
    out.reserve(ds.size());
    for (const auto& s : ds.samples) out.push_back(*s.intensities);
    return out;
}

nlohmann::json annotation_summary(const Dataset& annotated, const AnnotationConfig& annotation) {
    Dataset labeled = labeled_subset(annotated);
    nlohmann::json j;
    j["samples"] = annotated.size();
    j["labeled_samples"] = labeled.size();
    if (labeled.size() == 0) return j;
    j["oracle_k"] = evaluate(labeled, PredictionPolicy::oracle_k, annotation);
    j["threshold"] = evaluate(labeled, PredictionPolicy::threshold, annotation);
    j["hit_table"] = hit_table(labeled);
    return j;
}

}  // namespace

void PipelineConfig::validate() const {
    featurizer.validate();
    train.validate();
    annotation.validate();
    if (!(validation_fraction > 0.0 && validation_fraction <= 0.5)) {
        throw ConfigError("validation_fraction must be in (0, 0.5]");
    }
    if (regress_threshold) AnnotationConfig{*regress_threshold}.validate();
}

void to_json(nlohmann::json& j, const PipelineConfig& cfg) {
    j = nlohmann::json{{"featurizer", cfg.featurizer},
                       {"train", cfg.train},
                       {"annotation", {{"threshold", cfg.annotation.threshold}}},
                       {"backend", to_string(cfg.backend)},
                       {"validation_fraction", cfg.validation_fraction},
                       {"resampling", to_string(cfg.resampling)},
                       {"warm_start", cfg.warm_start}};
    j["regress_threshold"] =
        cfg.regress_threshold ? nlohmann::json(*cfg.regress_threshold) : nlohmann::json();
}

void from_json(const nlohmann::json& j, PipelineConfig& cfg) {
    if (!j.is_object()) throw ConfigError("pipeline config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (key == "featurizer") {
            from_json(value, cfg.featurizer);
        } else if (key == "train") {
            from_json(value, cfg.train);
        } else if (key == "annotation") {
            if (!value.is_object()) throw ConfigError("annotation must be an object");
            for (const auto& [k, v] : value.items()) {
                if (k != "threshold") throw ConfigError("unknown annotation key: " + k);
                cfg.annotation.threshold = v.get<double>();
            }
        } else if (key == "backend") {
            cfg.backend = parse_backend(value.get<std::string>());
        } else if (key == "validation_fraction") {
            cfg.validation_fraction = value.get<double>();
        } else if (key == "resampling") {
            cfg.resampling = parse_resampling(value.get<std::string>());
        } else if (key == "warm_start") {
            cfg.warm_start = value.get<bool>();
        } else if (key == "regress_threshold") {
            cfg.regress_threshold =
                value.is_null() ? std::nullopt : std::optional<double>(value.get<double>());
        } else {
            throw ConfigError("unknown pipeline key: " + key);
        }
    }
    cfg.validate();
}

std::string config_fingerprint(const PipelineConfig& cfg) {
    nlohmann::json j = cfg;
    return fingerprint_hex(j.dump());
}

SplitIndices split_validation(std::size_t m, double fraction, std::uint64_t seed) {
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed ^ 0x5bd1e9955bd1e995ULL);
    std::shuffle(order.begin(), order.end(), rng);
    auto held = static_cast<std::size_t>(static_cast<double>(m) * fraction);
    SplitIndices out;
    out.fit.assign(order.begin(), order.end() - static_cast<std::ptrdiff_t>(held));
    out.validation.assign(order.end() - static_cast<std::ptrdiff_t>(held), order.end());
    std::sort(out.fit.begin(), out.fit.end());
    std::sort(out.validation.begin(), out.validation.end());
    return out;
}

std::vector<std::size_t> resample(const Dataset& ds, std::span<const std::size_t> indices,
                                  Resampling mode, std::uint64_t seed) {
    std::vector<std::size_t> out(indices.begin(), indices.end());
    if (mode == Resampling::off) return out;

    const std::size_t C = ds.vocab.size();
    std::vector<std::size_t> counts(C, 0);
    for (auto i : indices) {
        for (auto j : ds.samples[i].gold) ++counts[j];
    }
    std::vector<std::size_t> sorted = counts;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t median = sorted[C / 2];

    if (mode == Resampling::oversample) {
        for (std::size_t j = 0; j < C; ++j) {
            if (counts[j] == 0 || counts[j] >= median) continue;
            std::vector<std::size_t> members;
            for (auto i : indices) {
                const auto& g = ds.samples[i].gold;
                if (std::binary_search(g.begin(), g.end(), j)) members.push_back(i);
            }
            for (std::size_t n = 0; counts[j] < median; ++n) {
                auto i = members[n % members.size()];
                out.push_back(i);
                for (auto l : ds.samples[i].gold) ++counts[l];
            }
        }
        return out;
    }

    std::mt19937_64 rng(seed ^ 0x2545f4914f6cdd1dULL);
    std::shuffle(out.begin(), out.end(), rng);
    std::vector<std::size_t> kept_counts(C, 0);
    std::vector<std::size_t> kept;
    for (auto i : out) {
        const auto& g = ds.samples[i].gold;
        bool keep = g.empty() || std::any_of(g.begin(), g.end(),
                                             [&](std::size_t l) { return kept_counts[l] < median; });
        if (!keep) continue;
        kept.push_back(i);
        for (auto l : g) ++kept_counts[l];
    }
    std::sort(kept.begin(), kept.end());
    return kept;
}

Dataset annotate_dataset(const Checkpoint& ckpt, const Dataset& ds, const AnnotationConfig& annotation,
                         const FeaturizerConfig* expected, std::size_t threads) {
    annotation.validate();
    if (expected != nullptr && fingerprint(*expected) != fingerprint(ckpt.featurizer)) {
        throw ConfigError(fmt::format("featurizer fingerprint mismatch (checkpoint {}, configuration {})",
                                      fingerprint(ckpt.featurizer), fingerprint(*expected)));
    }
    if (label_count(ckpt.model) != ds.vocab.size()) {
        throw DataError(fmt::format("model predicts {} labels but the dataset has {}",
                                    label_count(ckpt.model), ds.vocab.size()));
    }
    const IdfTable* idf = ckpt.featurizer.weighting == Weighting::tfidf ? &ckpt.idf : nullptr;
    auto features = featurize_all(ds, ckpt.featurizer, idf);
    auto raw = predict_all(ckpt.model, features, threads);

    Dataset out = ds;
    for (std::size_t i = 0; i < out.samples.size(); ++i) {
        out.samples[i].intensities = annotate_threshold(raw[i], annotation);
    }
    return out;
}

void verify_regressed(const Dataset& regressed, const Dataset& annotated) {
    if (regressed.size() != annotated.size()) throw Error("regressed set size differs from annotation");
    for (std::size_t i = 0; i < regressed.size(); ++i) {
        const auto& s = regressed.samples[i];
        const auto& before = *annotated.samples[i].intensities;
        const auto& after = *s.intensities;
        if (after.size() != before.size()) throw Error(fmt::format("sample '{}': length changed", s.id));
        for (std::size_t j = 0; j < after.size(); ++j) {
            bool gold = std::binary_search(s.gold.begin(), s.gold.end(), j);
            double want = gold ? kMaxIntensity : before[j];
            if (after[j] != want) {
                throw Error(fmt::format("sample '{}' label {}: regressed value {} expected {}", s.id, j,
                                        after[j], want));
            }
        }
    }
}

PipelineRun run_coeqn(const Dataset& train, const Dataset& test, const PipelineConfig& cfg,
                      const Dataset* validation) {
    step("configuration", [&] { cfg.validate(); });
    step("input check", [&] {
        if (train.size() == 0) throw DataError("training set is empty");
        require_same_vocab(train, test, "test");
        if (validation != nullptr) require_same_vocab(train, *validation, "validation");
        for (const auto& s : train.samples) validate_sample(s, train.vocab);
    });

    PipelineRun run;
    run.config = cfg;
    run.fingerprint = config_fingerprint(cfg);

    auto prepared = step("step 1 (featurize training set)", [&] { return prepare(train, cfg, validation); });
    run.fit_samples = prepared.fit.size();
    run.validation_samples = prepared.val_features.size();

    auto targets = step("step 2 (full label initialization)", [&] { return initial_targets(train); });
    std::vector<IntensityVector> val_targets;
    if (validation != nullptr) {
        val_targets = initial_targets(*validation);
    } else {
        for (auto i : prepared.val) val_targets.push_back(targets[i]);
    }

    auto result = step("step 3 (train model 1)",
                       [&] { return fit_model(prepared, targets, val_targets, cfg, nullptr); });
    log::info("model 1: best epoch {} of {}", result.report.best_epoch, result.report.train_loss.size());
    run.model1 = Checkpoint{cfg.featurizer, prepared.idf, std::move(result.model), run.fingerprint,
                            cfg.train.seed};
    run.report1 = std::move(result.report);

    run.test_coeqn = step("step 4 (annotate test set with model 1)", [&] {
        return annotate_dataset(run.model1, test, AnnotationConfig{0.0}, nullptr, cfg.threads);
    });
    return run;
}

PipelineRun run_eqn(const Dataset& train, const Dataset& test, const PipelineConfig& cfg,
                    const Dataset* validation) {
    PipelineRun run = run_coeqn(train, test, cfg, validation);

    const AnnotationConfig regress_cfg{cfg.regress_threshold.value_or(0.0)};
    auto annotated = step("step 6 (annotate training set with model 1)", [&] {
        return annotate_dataset(run.model1, train, regress_cfg, nullptr, cfg.threads);
    });

    Dataset regressed = annotated;
    step("step 6 (label regression)", [&] {
        for (auto& s : regressed.samples) s.intensities = regress_labels(s.gold, *s.intensities);
        verify_regressed(regressed, annotated);
    });

    auto prepared = step("step 7 (featurize training set)", [&] { return prepare(train, cfg, validation); });
    auto targets = targets_of(regressed);
    std::vector<IntensityVector> val_targets;
    if (validation != nullptr) {
        auto val_annotated = annotate_dataset(run.model1, *validation, regress_cfg, nullptr, cfg.threads);
        for (const auto& s : val_annotated.samples) val_targets.push_back(regress_labels(s.gold, *s.intensities));
    } else {
        for (auto i : prepared.val) val_targets.push_back(targets[i]);
    }

    const Model* warm = cfg.warm_start ? &run.model1.model : nullptr;
    auto result = step("step 7 (train model 2)",
                       [&] { return fit_model(prepared, targets, val_targets, cfg, warm); });
    log::info("model 2: best epoch {} of {}", result.report.best_epoch, result.report.train_loss.size());
    run.model2 = Checkpoint{cfg.featurizer, prepared.idf, std::move(result.model), run.fingerprint,
                            cfg.train.seed};
    run.report2 = std::move(result.report);
    run.train_regressed = std::move(regressed);

    run.test_eqn = step("step 8 (annotate test set with model 2)", [&] {
        return annotate_dataset(*run.model2, test, AnnotationConfig{0.0}, nullptr, cfg.threads);
    });
    return run;
}

nlohmann::json run_report(const PipelineRun& run) {
    nlohmann::json j;
    j["mode"] = run.is_eqn() ? "eqn" : "coeqn";
    j["config_fingerprint"] = run.fingerprint;
    j["seed"] = run.config.train.seed;
    j["threshold"] = run.config.annotation.threshold;
    j["fit_samples"] = run.fit_samples;
    j["validation_samples"] = run.validation_samples;
    j["model1"] = run.report1;
    j["coeqn"] = annotation_summary(run.test_coeqn, run.config.annotation);
    if (run.is_eqn()) {
        j["model2"] = *run.report2;
        j["eqn"] = annotation_summary(*run.test_eqn, run.config.annotation);
    }
    return j;
}

void write_sidecar(const std::string& path, const std::string& fingerprint, std::uint64_t seed,
                   const nlohmann::json& extra) {
    nlohmann::json j = extra;
    j["config_fingerprint"] = fingerprint;
    j["seed"] = seed;
    j["file"] = std::filesystem::path(path).filename().string();
    csv::write_file(path + ".meta.json", j.dump(2) + "\n");
}

void save_run(const PipelineRun& run, const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError(fmt::format("cannot create run directory {}: {}", dir, ec.message()));
    auto at = [&](std::string_view name) { return (fs::path(dir) / name).string(); };
    const auto seed = run.config.train.seed;

    nlohmann::json config;
    config["pipeline"] = run.config;
    config["config_fingerprint"] = run.fingerprint;
    config["seed"] = seed;
    csv::write_file(at("config.json"), config.dump(2) + "\n");

    save_checkpoint(run.model1, at("model1.ckpt"));
    emit_full(run.test_coeqn, at("test_annotated_coeqn.csv"));
    write_sidecar(at("test_annotated_coeqn.csv"), run.fingerprint, seed, {{"model", "model1"}});
    if (run.is_eqn()) {
        save_checkpoint(*run.model2, at("model2.ckpt"));
        emit_full(*run.train_regressed, at("train_regressed.csv"));
        write_sidecar(at("train_regressed.csv"), run.fingerprint, seed, {{"model", "model1"}});
        emit_full(*run.test_eqn, at("test_annotated_eqn.csv"));
        write_sidecar(at("test_annotated_eqn.csv"), run.fingerprint, seed, {{"model", "model2"}});
    }
    csv::write_file(at("report.json"), run_report(run).dump(2) + "\n");
}

}  // namespace eqn
