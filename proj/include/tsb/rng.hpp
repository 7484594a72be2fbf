#pragma once

#include <cstdint>
#include <string_view>

// Pinned, platform-independent hashing / mixing primitives. All sampling in
// the harness derives from these so that runs are byte-identical across
// machines regardless of the standard library's PRNG implementation.

namespace tsb {

// splitmix64 finalizer (Steele et al.). One full avalanche round.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Combine two 64-bit values into a new seed.
constexpr std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
    return splitmix64(a ^ splitmix64(b));
}

// Seed for sampling the history shown to one test example: every test
// example gets its own draw of h, realizing the expectation over histories.
constexpr std::uint64_t derive_history_seed(std::uint64_t run_seed,
                                            std::string_view test_instance_id,
                                            std::uint64_t draw_index) {
    return mix64(mix64(run_seed, fnv1a64(test_instance_id)), draw_index);
}

}  // namespace tsb
