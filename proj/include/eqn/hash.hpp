#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace eqn {

/// FNV-1a 64-bit over `seed` (8 bytes, little endian) followed by `data`,
/// finished with the splitmix64 avalanche step. This is the fixed token hash
/// used by the featurizer; changing it invalidates every saved checkpoint.
std::uint64_t hash64(std::string_view data, std::uint64_t seed = 0);

/// 16-character lowercase hex rendering of hash64(data, 0). Used for config
/// fingerprints stamped into outputs.
std::string fingerprint_hex(std::string_view data);

}  // namespace eqn
