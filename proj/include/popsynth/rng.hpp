#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace popsynth {

using Rng = std::mt19937_64;

// 64-bit FNV-1a. Used for content digests in manifests and for deriving
// per-zone seeds from (experiment seed, zone id).
inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 14695981039346656037ULL) {
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Stable seed for a named sub-stream of a master seed. Reordering the
// consumers does not change any stream.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag) {
    return splitmix64(master ^ fnv1a64(tag));
}

} // namespace popsynth
