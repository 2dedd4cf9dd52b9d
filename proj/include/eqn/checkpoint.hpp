#pragma once

#include <cstdint>
#include <string>

#include "eqn/featurize.hpp"
#include "eqn/regressor.hpp"

namespace eqn {

/// A trained model bundled with everything needed to featurize new text.
struct Checkpoint {
    FeaturizerConfig featurizer;
    IdfTable idf;
    Model model;
    std::string config_fingerprint;
    std::uint64_t seed = 0;
};

/// Binary layout, all integers and doubles little endian:
///   "EQNCKPT\0" | u32 version | u64 header length | JSON header | f64 payload
/// The payload holds the idf table followed by the model's parameter blocks.
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);

/// When `expected_featurizer` is given its fingerprint must match the one
/// stored in the file, else ConfigError.
Checkpoint load_checkpoint(const std::string& path,
                           const FeaturizerConfig* expected_featurizer = nullptr);

}  // namespace eqn
