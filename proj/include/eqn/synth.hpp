#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "eqn/corpus.hpp"

namespace eqn {

/// Recipe for a synthetic corpus with known per-label intensities.
///
/// Each sample gets one dominant label, chosen uniformly, with intensity
/// uniform on [5,10]; every other label gets a micro intensity
/// `micro * u^skew` (u uniform on [0,1)). An optional row-stochastic `mixing`
/// matrix then blends labels so that they co-occur. The result is the latent
/// truth. The text is `words_per_text` pseudo-words, each picked from label
/// j's private vocabulary with probability latent_j / sum(latent), so token
/// shares track the latent intensities. `noise` jitters those sampling
/// weights (Gaussian, in intensity units) without changing the latent truth.
struct SynthSpec {
    std::size_t labels = 5;
    std::size_t words_per_label = 40;
    std::size_t words_per_text = 60;
    std::size_t samples = 2000;
    double micro = 4.0;
    double skew = 2.0;
    double noise = 0.0;
    std::vector<std::vector<double>> mixing;  // empty = identity
    /// true: gold = {arg-max latent}; false: gold = {j : latent_j >= 5}.
    bool collapse = true;
    std::uint64_t seed = 0;

    void validate() const;
};

void to_json(nlohmann::json& j, const SynthSpec& spec);
void from_json(const nlohmann::json& j, SynthSpec& spec);

/// Labels em0..em{C-1}.
LabelVocabulary synth_vocabulary(std::size_t labels);

/// Pseudo-word `k` of label `j`, e.g. em3_w017.
std::string synth_word(std::size_t label, std::size_t word);

struct SynthCorpus {
    Dataset dataset;                     // intensities left empty
    std::vector<IntensityVector> latent;  // one row per sample, same order
};

/// Pure function of the spec.
SynthCorpus generate(const SynthSpec& spec);

/// `id,<label names>` with 6-decimal values.
std::string format_latent_csv(const SynthCorpus& corpus);

struct RecoveryScore {
    std::vector<double> per_label;
    double mean = 0.0;
};

/// Pearson r between annotated and latent intensity, per label, and its mean.
RecoveryScore recovery_score(const Dataset& annotated, const std::vector<IntensityVector>& latent);

/// Pairs label 2p with 2p+1: each keeps `self` of its own raw intensity and
/// takes the rest from its partner. An odd last label maps to itself.
std::vector<std::vector<double>> paired_mixing(std::size_t labels, double self);

}  // namespace eqn
