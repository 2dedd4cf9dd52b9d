#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "eqn/checkpoint.hpp"
#include "eqn/corpus.hpp"
#include "eqn/featurize.hpp"
#include "eqn/labelspace.hpp"
#include "eqn/regressor.hpp"

namespace eqn {

enum class Resampling { off, oversample, undersample };

struct PipelineConfig {
    FeaturizerConfig featurizer;
    TrainConfig train;
    AnnotationConfig annotation;
    Backend backend = Backend::linear;
    double validation_fraction = 0.1;
    Resampling resampling = Resampling::off;
    /// Start Model 2 from Model 1's parameters instead of a fresh initialization.
    bool warm_start = false;
    /// Threshold applied to Model 1's training-set annotation before label
    /// regression. Unset keeps every clamped value.
    std::optional<double> regress_threshold;
    /// Worker cap for annotation. Not serialized; it never changes results.
    std::size_t threads = 1;

    void validate() const;
};

void to_json(nlohmann::json& j, const PipelineConfig& cfg);
/// Rejects unknown keys at every level.
void from_json(const nlohmann::json& j, PipelineConfig& cfg);

/// Content hash of the serialized configuration.
std::string config_fingerprint(const PipelineConfig& cfg);

struct PipelineRun {
    PipelineConfig config;
    std::string fingerprint;
    Checkpoint model1;
    TrainReport report1;
    Dataset test_coeqn;
    std::optional<Dataset> train_regressed;
    std::optional<Checkpoint> model2;
    std::optional<TrainReport> report2;
    std::optional<Dataset> test_eqn;
    std::size_t fit_samples = 0;
    std::size_t validation_samples = 0;

    bool is_eqn() const noexcept { return model2.has_value(); }
};

struct SplitIndices {
    std::vector<std::size_t> fit;
    std::vector<std::size_t> validation;
};

/// Shuffles indices under `seed` and holds out the last floor(m * fraction)
/// of them. Both parts keep their original relative order.
SplitIndices split_validation(std::size_t m, double fraction, std::uint64_t seed);

/// Adjusts sample multiplicity only. Oversampling duplicates samples of
/// below-median classes (cycling in order) until each reaches the median
/// class count; undersampling keeps a sample only while one of its labels is
/// still below the median.
std::vector<std::size_t> resample(const Dataset& ds, std::span<const std::size_t> indices,
                                  Resampling mode, std::uint64_t seed);

/// Clamped model annotation with `annotation.threshold` applied. Gold sets and
/// order are untouched. With `expected` set, its fingerprint must match the
/// checkpoint's featurizer.
Dataset annotate_dataset(const Checkpoint& ckpt, const Dataset& ds, const AnnotationConfig& annotation,
                         const FeaturizerConfig* expected = nullptr, std::size_t threads = 1);

/// Throws Error unless every sample of `regressed` has 10 at each gold index
/// and `annotated`'s value everywhere else.
void verify_regressed(const Dataset& regressed, const Dataset& annotated);

/// Core pipeline: initialize full labels, train Model 1, annotate the test set.
/// `validation` replaces the held-out fraction of `train` when given.
PipelineRun run_coeqn(const Dataset& train, const Dataset& test, const PipelineConfig& cfg,
                      const Dataset* validation = nullptr);

/// run_coeqn, then label regression of the training set and Model 2.
PipelineRun run_eqn(const Dataset& train, const Dataset& test, const PipelineConfig& cfg,
                    const Dataset* validation = nullptr);

/// Metrics, hit tables, and training curves of a run.
nlohmann::json run_report(const PipelineRun& run);

/// Writes config.json, model1.ckpt, test_annotated_coeqn.csv, report.json
/// and, for EQN runs, model2.ckpt, train_regressed.csv, test_annotated_eqn.csv.
/// CSV files get a `<name>.meta.json` sidecar.
void save_run(const PipelineRun& run, const std::string& dir);

/// `<path>.meta.json` holding the config fingerprint, seed, and `extra`.
void write_sidecar(const std::string& path, const std::string& fingerprint, std::uint64_t seed,
                   const nlohmann::json& extra = nlohmann::json::object());

}  // namespace eqn
