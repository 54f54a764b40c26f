#pragma once

#include <cstdint>
#include <random>

namespace fisherbound {

using Rng = std::mt19937_64;

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Independent stream keyed by (seed, a, b). The key is hashed, not advanced, so
// stream contents do not depend on the order in which streams are created.
inline Rng make_stream(uint64_t seed, uint64_t a, uint64_t b = 0) {
    uint64_t k = splitmix64(seed);
    k = splitmix64(k ^ splitmix64(a + 0x632be59bd9b4e019ULL));
    k = splitmix64(k ^ splitmix64(b + 0x85157af5ULL));
    std::seed_seq seq{static_cast<uint32_t>(k), static_cast<uint32_t>(k >> 32), static_cast<uint32_t>(a),
                      static_cast<uint32_t>(b)};
    return Rng(seq);
}

}  // namespace fisherbound
