#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace eqn {

using LabelIndex = std::size_t;

/// Sorted, duplicate-free set of label indices.
using LabelSet = std::vector<LabelIndex>;

/// One intensity per label, on the 0..10 scale once clamped.
using IntensityVector = std::vector<double>;

inline constexpr double kMinIntensity = 0.0;
inline constexpr double kMaxIntensity = 10.0;

/// Ordered set of emotion category names.
class LabelVocabulary {
public:
    LabelVocabulary() = default;

    /// Throws DataError if names are fewer than two, empty, or duplicated.
    explicit LabelVocabulary(std::vector<std::string> names);

    /// One label name per line; blank lines and surrounding whitespace ignored.
    static LabelVocabulary load(const std::string& path);

    std::size_t size() const noexcept { return names_.size(); }
    const std::vector<std::string>& names() const noexcept { return names_; }
    const std::string& name(LabelIndex j) const { return names_.at(j); }
    std::optional<LabelIndex> index(std::string_view name) const;

    friend bool operator==(const LabelVocabulary& a, const LabelVocabulary& b) {
        return a.names_ == b.names_;
    }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, LabelIndex> index_;
};

struct Sample {
    std::string id;
    std::string text;
    LabelSet gold;
    std::optional<IntensityVector> intensities;
};

enum class Split { train, test, validation, unlabeled };

std::string_view to_string(Split split);

struct Dataset {
    LabelVocabulary vocab;
    std::vector<Sample> samples;
    Split split = Split::train;

    std::size_t size() const noexcept { return samples.size(); }
};

/// Parses "8,20" style label lists. Sorts and deduplicates. Throws DataError
/// on non-integer entries or indices >= label_count.
LabelSet parse_label_list(std::string_view field, std::size_t label_count);

/// Inverse of parse_label_list: "8,20", or "" for the empty set.
std::string format_label_list(const LabelSet& labels);

/// Checks the Sample invariants against `vocab`; throws DataError naming the sample.
void validate_sample(const Sample& sample, const LabelVocabulary& vocab);

/// Compact layout: header with `text` and `labels` columns (an optional `id`
/// column is accepted). Intensities are left empty.
Dataset load_compact(const std::string& path, const LabelVocabulary& vocab,
                     Split split = Split::train);

/// Full layout: `text`, `labels`, then one column per label name. The
/// vocabulary is rebuilt from the header; when `expected` is given the header
/// must name exactly those labels in the same order.
Dataset load_full(const std::string& path, const LabelVocabulary* expected = nullptr,
                  Split split = Split::train);

/// Loads either layout, deciding by the header. Compact files need `vocab`.
Dataset load_any(const std::string& path, const LabelVocabulary* vocab,
                 Split split = Split::train);

/// Full layout with 2-decimal intensities; byte-for-byte deterministic.
std::string format_full(const Dataset& ds);
void emit_full(const Dataset& ds, const std::string& path);

/// Compact layout `text,labels,id`.
std::string format_compact(const Dataset& ds);
void emit_compact(const Dataset& ds, const std::string& path);

/// Writes one label name per line.
void emit_vocabulary(const LabelVocabulary& vocab, const std::string& path);

}  // namespace eqn
