#pragma once

#include <cstdint>
#include <random>

namespace sparsedom {

// All randomness in the library flows from a single user seed through this
// split scheme: subtask k draws from mt19937_64(derive_seed(seed, k)).
// Child streams are independent of evaluation order, so serial and
// (hypothetical) parallel sweeps draw identical samples.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    return splitmix64(base + 0x9e3779b97f4a7c15ull * (stream + 1));
}

inline std::mt19937_64 make_rng(std::uint64_t base, std::uint64_t stream) {
    return std::mt19937_64(derive_seed(base, stream));
}

} // namespace sparsedom
