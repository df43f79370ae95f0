#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace fds {

// All randomness flows from one config seed through named substreams
// ("placement", "permutation", "noise", ...). The substream seed is the FNV-1a
// hash of the name folded into the base seed, so adding a substream never
// perturbs existing ones.
inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::mt19937_64 substream(std::uint64_t seed, std::string_view name) {
    return std::mt19937_64(seed ^ fnv1a64(name));
}

}  // namespace fds
