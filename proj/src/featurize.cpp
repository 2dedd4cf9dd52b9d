#include "eqn/featurize.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <set>

#include "eqn/error.hpp"
#include "eqn/hash.hpp"

namespace eqn {

namespace {

constexpr std::string_view kHashName = "fnv1a64-splitmix";

bool is_word_byte(unsigned char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
           c >= 0x80;
}

std::string_view to_string(Weighting w) { return w == Weighting::tfidf ? "tfidf" : "raw-count"; }

}  // namespace

void FeaturizerConfig::validate() const {
    if (dim < 2 || !std::has_single_bit(dim)) {
        throw ConfigError("featurizer dim must be a power of two >= 2");
    }
    if (dim > (std::size_t{1} << 31)) throw ConfigError("featurizer dim too large");
    if (max_tokens < 1) throw ConfigError("featurizer max_tokens must be >= 1");
}

void to_json(nlohmann::json& j, const FeaturizerConfig& cfg) {
    j = nlohmann::json{{"dim", cfg.dim},
                       {"max_tokens", cfg.max_tokens},
                       {"weighting", to_string(cfg.weighting)},
                       {"lowercase", cfg.lowercase},
                       {"normalize", cfg.normalize},
                       {"seed", cfg.seed}};
}

void from_json(const nlohmann::json& j, FeaturizerConfig& cfg) {
    if (!j.is_object()) throw ConfigError("featurizer config must be an object");
    for (const auto& [key, value] : j.items()) {
        if (key == "dim") {
            cfg.dim = value.get<std::size_t>();
        } else if (key == "max_tokens") {
            cfg.max_tokens = value.get<std::size_t>();
        } else if (key == "weighting") {
            auto w = value.get<std::string>();
            if (w == "tfidf") {
                cfg.weighting = Weighting::tfidf;
            } else if (w == "raw-count") {
                cfg.weighting = Weighting::raw_count;
            } else {
                throw ConfigError("featurizer.weighting must be 'tfidf' or 'raw-count'");
            }
        } else if (key == "lowercase") {
            cfg.lowercase = value.get<bool>();
        } else if (key == "normalize") {
            cfg.normalize = value.get<bool>();
        } else if (key == "seed") {
            cfg.seed = value.get<std::uint64_t>();
        } else {
            throw ConfigError("unknown featurizer key: " + key);
        }
    }
    cfg.validate();
}

std::string fingerprint(const FeaturizerConfig& cfg) {
    nlohmann::json j = cfg;
    j["hash"] = kHashName;
    return fingerprint_hex(j.dump());
}

FeatureVector::FeatureVector(std::vector<Entry> entries) : entries_(std::move(entries)) {
    double sq = 0.0;
    for (const auto& [index, weight] : entries_) sq += weight * weight;
    norm_ = std::sqrt(sq);
}

std::vector<std::string> tokenize(std::string_view text, const FeaturizerConfig& cfg) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < text.size() && tokens.size() < cfg.max_tokens) {
        while (i < text.size() && !is_word_byte(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t start = i;
        while (i < text.size() && is_word_byte(static_cast<unsigned char>(text[i]))) ++i;
        if (i == start) break;
        std::string token(text.substr(start, i - start));
        if (cfg.lowercase) {
            for (char& c : token) {
                if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
            }
        }
        tokens.push_back(std::move(token));
    }
    return tokens;
}

std::uint32_t token_index(std::string_view token, const FeaturizerConfig& cfg) {
    return static_cast<std::uint32_t>(hash64(token, cfg.seed) & (cfg.dim - 1));
}

FeatureVector featurize(std::string_view text, const FeaturizerConfig& cfg, const IdfTable* idf) {
    if (cfg.weighting == Weighting::tfidf) {
        if (idf == nullptr) throw ConfigError("tfidf weighting requires a fitted idf table");
        if (idf->values.size() != cfg.dim) throw ConfigError("idf table size does not match dim");
    }
    std::map<std::uint32_t, double> counts;
    for (const auto& token : tokenize(text, cfg)) counts[token_index(token, cfg)] += 1.0;

    std::vector<FeatureVector::Entry> entries;
    entries.reserve(counts.size());
    for (auto [index, count] : counts) {
        double weight = cfg.weighting == Weighting::tfidf ? count * idf->values[index] : count;
        entries.emplace_back(index, weight);
    }
    FeatureVector raw(std::move(entries));
    if (!cfg.normalize || raw.norm() == 0.0) return raw;
    auto scaled = raw.entries();
    for (auto& e : scaled) e.second /= raw.norm();
    return FeatureVector(std::move(scaled));
}

IdfTable fit_idf(const Dataset& ds, const FeaturizerConfig& cfg) {
    if (ds.samples.empty()) throw DataError("cannot fit idf on an empty dataset");
    std::vector<std::size_t> df(cfg.dim, 0);
    for (const auto& s : ds.samples) {
        std::set<std::uint32_t> seen;
        for (const auto& token : tokenize(s.text, cfg)) seen.insert(token_index(token, cfg));
        for (auto index : seen) ++df[index];
    }
    const double m = static_cast<double>(ds.samples.size());
    IdfTable table;
    table.values.resize(cfg.dim);
    for (std::size_t k = 0; k < cfg.dim; ++k) {
        table.values[k] = std::log((1.0 + m) / (1.0 + static_cast<double>(df[k]))) + 1.0;
    }
    return table;
}

std::vector<FeatureVector> featurize_all(const Dataset& ds, const FeaturizerConfig& cfg,
                                         const IdfTable* idf) {
    std::vector<FeatureVector> out;
    out.reserve(ds.samples.size());
    for (const auto& s : ds.samples) out.push_back(featurize(s.text, cfg, idf));
    return out;
}

}  // namespace eqn
