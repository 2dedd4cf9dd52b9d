#include "eqn/labelspace.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "eqn/error.hpp"

namespace eqn {

namespace {

// Descending by value, ascending by index on ties.
struct RankOrder {
    std::span<const double> values;
    bool operator()(LabelIndex a, LabelIndex b) const {
        if (values[a] != values[b]) return values[a] > values[b];
        return a < b;
    }
};

}  // namespace

void AnnotationConfig::validate() const {
    if (!(threshold >= kMinIntensity && threshold <= kMaxIntensity)) {
        throw ConfigError(fmt::format("threshold {} outside [0,10]", threshold));
    }
}

IntensityVector init_full_labels(const LabelSet& gold, std::size_t label_count) {
    IntensityVector out(label_count, kMinIntensity);
    for (LabelIndex j : gold) {
        if (j >= label_count) {
            throw DataError(fmt::format("label index {} out of range (label count {})", j, label_count));
        }
        out[j] = kMaxIntensity;
    }
    return out;
}

IntensityVector regress_labels(const LabelSet& gold, std::span<const double> model_annotation) {
    IntensityVector out(model_annotation.begin(), model_annotation.end());
    for (LabelIndex j : gold) {
        if (j >= out.size()) {
            throw DataError(fmt::format("gold index {} does not fit an annotation of length {}", j,
                                        out.size()));
        }
        out[j] = kMaxIntensity;
    }
    return out;
}

IntensityVector annotate_threshold(std::span<const double> raw, const AnnotationConfig& cfg) {
    IntensityVector out(raw.size());
    for (std::size_t j = 0; j < raw.size(); ++j) {
        double v = std::clamp(raw[j], kMinIntensity, kMaxIntensity);
        out[j] = v < cfg.threshold ? 0.0 : v;
    }
    return out;
}

IntensityVector clamp_intensities(std::span<const double> raw) {
    return annotate_threshold(raw, AnnotationConfig{0.0});
}

std::vector<LabelIndex> rank_labels(std::span<const double> raw) {
    std::vector<LabelIndex> order(raw.size());
    std::iota(order.begin(), order.end(), LabelIndex{0});
    std::sort(order.begin(), order.end(), RankOrder{raw});
    return order;
}

LabelSet top_k(std::span<const double> raw, std::size_t k) {
    if (k < 1 || k > raw.size()) {
        throw DataError(fmt::format("top_k: k={} outside [1, {}]", k, raw.size()));
    }
    std::vector<LabelIndex> order(raw.size());
    std::iota(order.begin(), order.end(), LabelIndex{0});
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      RankOrder{raw});
    order.resize(k);
    std::sort(order.begin(), order.end());
    return order;
}

LabelIndex arg_max(std::span<const double> raw) {
    if (raw.empty()) throw DataError("arg_max of an empty vector");
    LabelIndex best = 0;
    for (LabelIndex j = 1; j < raw.size(); ++j) {
        if (raw[j] > raw[best]) best = j;
    }
    return best;
}

}  // namespace eqn
