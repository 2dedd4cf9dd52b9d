#pragma once

#include <span>

#include "eqn/corpus.hpp"

namespace eqn {

/// Threshold annotation settings. Values are clamped to
/// [kMinIntensity, kMaxIntensity] before the threshold is applied.
struct AnnotationConfig {
    double threshold = 1.0;

    /// Throws ConfigError unless 0 <= threshold <= 10.
    void validate() const;
};

/// 10.0 at every gold index, 0.0 elsewhere.
IntensityVector init_full_labels(const LabelSet& gold, std::size_t label_count);

/// Restores gold positions of a model annotation to 10.0 and keeps every
/// other value unchanged.
IntensityVector regress_labels(const LabelSet& gold, std::span<const double> model_annotation);

/// Clamps each value to [0,10], then zeroes values below the threshold.
IntensityVector annotate_threshold(std::span<const double> raw, const AnnotationConfig& cfg);

/// Clamp only (equivalent to a threshold of 0).
IntensityVector clamp_intensities(std::span<const double> raw);

/// The k largest positions, ties broken by ascending index, returned sorted
/// by index. Throws DataError unless 1 <= k <= size.
LabelSet top_k(std::span<const double> raw, std::size_t k);

/// Positions ordered by descending value, ties by ascending index.
std::vector<LabelIndex> rank_labels(std::span<const double> raw);

/// Position of the largest value; lowest index on ties.
LabelIndex arg_max(std::span<const double> raw);

}  // namespace eqn
