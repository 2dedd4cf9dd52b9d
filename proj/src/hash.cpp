#include "eqn/hash.hpp"

#include <fmt/format.h>

namespace eqn {

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t hash64(std::string_view data, std::uint64_t seed) {
    std::uint64_t h = kFnvOffset;
    for (int i = 0; i < 8; ++i) {
        h ^= (seed >> (8 * i)) & 0xffU;
        h *= kFnvPrime;
    }
    for (unsigned char c : data) {
        h ^= c;
        h *= kFnvPrime;
    }
    return mix(h);
}

std::string fingerprint_hex(std::string_view data) { return fmt::format("{:016x}", hash64(data)); }

}  // namespace eqn
