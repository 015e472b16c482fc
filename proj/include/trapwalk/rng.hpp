#ifndef TRAPWALK_RNG_HPP
#define TRAPWALK_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>

namespace trapwalk {

// Seed derivation. Every random task gets its own generator seeded from
// (master seed, stream name, task index), so results do not depend on how
// tasks are scheduled across workers. mt19937_64 does the actual generation;
// the mixing below only spreads the three inputs over the seed space.

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view stream,
                                 std::uint64_t index) {
    // Each input must be avalanched before the next one is folded in.
    // Folding raw values into the state with xor/add lets nearby masters
    // collide exactly: with state(m, e) = ((m + c) ^ h) + c) ^ e, masters 3
    // and 4 satisfy state(3, e) == state(4, e ^ 3) for every index, so whole
    // experiment cohorts came out as permutations of each other.
    std::uint64_t state = master;
    state = splitmix64_next(state) ^ fnv1a64(stream);
    state = splitmix64_next(state) ^ index;
    return splitmix64_next(state);
}

inline std::mt19937_64 make_rng(std::uint64_t master, std::string_view stream,
                                std::uint64_t index) {
    return std::mt19937_64(derive_seed(master, stream, index));
}

// Uniform on (0, 1]: take the top 53 bits and shift away from zero. Never
// returns 0, so -log(u) and pow(u, -1/gamma) are always finite.
inline double uniform_pos(std::mt19937_64& g) {
    return static_cast<double>((g() >> 11) + 1) * 0x1p-53;
}

// Uniform on [0, 1).
inline double uniform01(std::mt19937_64& g) {
    return static_cast<double>(g() >> 11) * 0x1p-53;
}

} // namespace trapwalk

#endif
