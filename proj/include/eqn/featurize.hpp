#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "eqn/corpus.hpp"

namespace eqn {

enum class Weighting { raw_count, tfidf };

struct FeaturizerConfig {
    std::size_t dim = std::size_t{1} << 15;
    std::size_t max_tokens = 150;
    Weighting weighting = Weighting::tfidf;
    bool lowercase = true;
    /// Scale each vector to unit L2 norm after weighting.
    bool normalize = true;
    std::uint64_t seed = 0;

    /// Throws ConfigError unless dim is a power of two >= 2 and max_tokens >= 1.
    void validate() const;
};

void to_json(nlohmann::json& j, const FeaturizerConfig& cfg);
/// Rejects unknown keys; missing keys keep their defaults.
void from_json(const nlohmann::json& j, FeaturizerConfig& cfg);

/// Hash of the canonical JSON form plus the hash algorithm name. Two configs
/// with the same fingerprint produce identical feature vectors.
std::string fingerprint(const FeaturizerConfig& cfg);

/// Sparse feature vector with entries sorted by index.
class FeatureVector {
public:
    using Entry = std::pair<std::uint32_t, double>;

    FeatureVector() = default;
    /// Entries must be sorted by index without duplicates.
    explicit FeatureVector(std::vector<Entry> entries);

    const std::vector<Entry>& entries() const noexcept { return entries_; }
    std::size_t nnz() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }
    double norm() const noexcept { return norm_; }

    friend bool operator==(const FeatureVector& a, const FeatureVector& b) {
        return a.entries_ == b.entries_;
    }

private:
    std::vector<Entry> entries_;
    double norm_ = 0.0;
};

/// Per-index inverse document frequencies, one value per hash bucket.
struct IdfTable {
    std::vector<double> values;
};

/// Maximal runs of word characters (ASCII letters, digits, underscore, and any
/// byte >= 0x80 so UTF-8 words stay whole), lowercased when configured,
/// truncated to cfg.max_tokens.
std::vector<std::string> tokenize(std::string_view text, const FeaturizerConfig& cfg);

/// Bucket of one token: hash64(token, cfg.seed) mod cfg.dim.
std::uint32_t token_index(std::string_view token, const FeaturizerConfig& cfg);

/// Hashed bag of words. Raw counts, or counts times idf when weighting is
/// tfidf (then `idf` is required, else ConfigError), optionally scaled to
/// unit length.
FeatureVector featurize(std::string_view text, const FeaturizerConfig& cfg,
                        const IdfTable* idf = nullptr);

/// idf = ln((1 + m) / (1 + df)) + 1 over the dataset's documents.
IdfTable fit_idf(const Dataset& ds, const FeaturizerConfig& cfg);

/// Featurizes every sample of a dataset, preserving order.
std::vector<FeatureVector> featurize_all(const Dataset& ds, const FeaturizerConfig& cfg,
                                         const IdfTable* idf);

}  // namespace eqn
