#include "eqn/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "eqn/error.hpp"
#include "eqn/eval.hpp"

namespace eqn {

void SynthSpec::validate() const {
    if (labels < 2) throw ConfigError("synth: labels must be >= 2");
    if (samples < 10) throw ConfigError("synth: samples must be >= 10");
    if (words_per_label < 1 || words_per_text < 1) {
        throw ConfigError("synth: words_per_label and words_per_text must be >= 1");
    }
    if (!(skew > 0.0)) throw ConfigError("synth: skew must be > 0");
    if (!(micro >= 0.0 && micro <= kMaxIntensity)) throw ConfigError("synth: micro must be in [0,10]");
    if (!(noise >= 0.0)) throw ConfigError("synth: noise must be >= 0");
    if (!mixing.empty()) {
        if (mixing.size() != labels) throw ConfigError("synth: mixing must be labels x labels");
        for (const auto& row : mixing) {
            if (row.size() != labels) throw ConfigError("synth: mixing must be labels x labels");
            double sum = 0.0;
            for (double w : row) {
                if (!(w >= 0.0)) throw ConfigError("synth: mixing weights must be >= 0");
                sum += w;
            }
            if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("synth: mixing rows must sum to 1");
        }
    }
}

void to_json(nlohmann::json& j, const SynthSpec& spec) {
    j = nlohmann::json{{"labels", spec.labels},
                       {"words_per_label", spec.words_per_label},
                       {"words_per_text", spec.words_per_text},
                       {"samples", spec.samples},
                       {"micro", spec.micro},
                       {"skew", spec.skew},
                       {"noise", spec.noise},
                       {"mixing", spec.mixing},
                       {"collapse", spec.collapse},
                       {"seed", spec.seed}};
}

void from_json(const nlohmann::json& j, SynthSpec& spec) {
    if (!j.is_object()) throw ConfigError("synth spec must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (key == "labels") {
            spec.labels = value.get<std::size_t>();
        } else if (key == "words_per_label") {
            spec.words_per_label = value.get<std::size_t>();
        } else if (key == "words_per_text") {
            spec.words_per_text = value.get<std::size_t>();
        } else if (key == "samples") {
            spec.samples = value.get<std::size_t>();
        } else if (key == "micro") {
            spec.micro = value.get<double>();
        } else if (key == "skew") {
            spec.skew = value.get<double>();
        } else if (key == "noise") {
            spec.noise = value.get<double>();
        } else if (key == "mixing") {
            spec.mixing = value.get<std::vector<std::vector<double>>>();
        } else if (key == "collapse") {
            spec.collapse = value.get<bool>();
        } else if (key == "seed") {
            spec.seed = value.get<std::uint64_t>();
        } else {
            throw ConfigError("unknown synth key: " + key);
        }
    }
    spec.validate();
}

LabelVocabulary synth_vocabulary(std::size_t labels) {
    std::vector<std::string> names;
    for (std::size_t j = 0; j < labels; ++j) names.push_back(fmt::format("em{}", j));
    return LabelVocabulary(std::move(names));
}

std::string synth_word(std::size_t label, std::size_t word) {
    return fmt::format("em{}_w{:03}", label, word);
}

SynthCorpus generate(const SynthSpec& spec) {
    spec.validate();
    const std::size_t C = spec.labels;
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> jitter(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick_word(0, spec.words_per_label - 1);
    std::uniform_int_distribution<std::size_t> pick_dominant(0, C - 1);
    std::uniform_real_distribution<double> dominant_level(5.0, kMaxIntensity);

    SynthCorpus corpus;
    corpus.dataset.vocab = synth_vocabulary(C);
    corpus.dataset.split = Split::train;
    corpus.dataset.samples.reserve(spec.samples);
    corpus.latent.reserve(spec.samples);

    std::vector<double> raw(C);
    std::vector<double> weights(C);
    for (std::size_t i = 0; i < spec.samples; ++i) {
        for (auto& r : raw) r = spec.micro * std::pow(unit(rng), spec.skew);
        raw[pick_dominant(rng)] = dominant_level(rng);
        IntensityVector latent(C);
        if (spec.mixing.empty()) {
            latent = raw;
        } else {
            for (std::size_t a = 0; a < C; ++a) {
                double s = 0.0;
                for (std::size_t b = 0; b < C; ++b) s += spec.mixing[a][b] * raw[b];
                latent[a] = std::clamp(s, kMinIntensity, kMaxIntensity);
            }
        }

        for (std::size_t j = 0; j < C; ++j) {
            double w = latent[j];
            if (spec.noise > 0.0) w += spec.noise * jitter(rng);
            weights[j] = std::max(w, 0.0);
        }
        if (std::all_of(weights.begin(), weights.end(), [](double w) { return w == 0.0; })) {
            std::fill(weights.begin(), weights.end(), 1.0);
        }
        std::discrete_distribution<std::size_t> pick_label(weights.begin(), weights.end());

        std::string text;
        for (std::size_t t = 0; t < spec.words_per_text; ++t) {
            if (t > 0) text.push_back(' ');
            std::size_t label = pick_label(rng);
            text += synth_word(label, pick_word(rng));
        }

        Sample s;
        s.id = fmt::format("s{:05}", i);
        s.text = std::move(text);
        if (spec.collapse) {
            s.gold = {static_cast<LabelIndex>(
                std::max_element(latent.begin(), latent.end()) - latent.begin())};
        } else {
            for (std::size_t j = 0; j < C; ++j) {
                if (latent[j] >= 5.0) s.gold.push_back(j);
            }
        }
        corpus.dataset.samples.push_back(std::move(s));
        corpus.latent.push_back(std::move(latent));
    }
    return corpus;
}

std::string format_latent_csv(const SynthCorpus& corpus) {
    std::string out = "id";
    for (const auto& name : corpus.dataset.vocab.names()) out += "," + name;
    out += '\n';
    for (std::size_t i = 0; i < corpus.latent.size(); ++i) {
        out += corpus.dataset.samples[i].id;
        for (double v : corpus.latent[i]) out += fmt::format(",{:.6f}", v);
        out += '\n';
    }
    return out;
}

RecoveryScore recovery_score(const Dataset& annotated, const std::vector<IntensityVector>& latent) {
    if (annotated.samples.size() != latent.size()) {
        throw DataError(fmt::format("recovery_score: {} annotated samples but {} latent rows",
                                    annotated.samples.size(), latent.size()));
    }
    const std::size_t C = annotated.vocab.size();
    std::vector<std::vector<double>> got(C);
    std::vector<std::vector<double>> truth(C);
    for (std::size_t i = 0; i < latent.size(); ++i) {
        const auto& s = annotated.samples[i];
        if (!s.intensities) throw DataError(fmt::format("sample '{}' has no intensities", s.id));
        if (s.intensities->size() != C || latent[i].size() != C) {
            throw DataError(fmt::format("recovery_score: row {} length mismatch", i));
        }
        for (std::size_t j = 0; j < C; ++j) {
            got[j].push_back((*s.intensities)[j]);
            truth[j].push_back(latent[i][j]);
        }
    }
    RecoveryScore score;
    for (std::size_t j = 0; j < C; ++j) score.per_label.push_back(pearson(got[j], truth[j]));
    score.mean = std::accumulate(score.per_label.begin(), score.per_label.end(), 0.0) /
                 static_cast<double>(C);
    return score;
}

std::vector<std::vector<double>> paired_mixing(std::size_t labels, double self) {
    std::vector<std::vector<double>> m(labels, std::vector<double>(labels, 0.0));
    for (std::size_t j = 0; j < labels; ++j) {
        std::size_t partner = j ^ 1U;
        if (partner >= labels) {
            m[j][j] = 1.0;
        } else {
            m[j][j] = self;
            m[j][partner] = 1.0 - self;
        }
    }
    return m;
}

}  // namespace eqn
