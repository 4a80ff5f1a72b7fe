#pragma once

#include <cstdint>
#include <random>

namespace isoclock {

using Rng = std::mt19937_64;

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Seed-splitting rule used everywhere a master seed fans out:
//   child = mix64(mix64(master ^ mix64(stream)) + index)
// `stream` separates subsystems (see SeedStream), `index` enumerates trials.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) noexcept {
    return mix64(mix64(master ^ mix64(stream)) + index);
}

enum class SeedStream : std::uint64_t {
    Fringe = 1,
    CampaignNew = 2,
    CampaignNatural = 3,
    LadderRun = 4,
    Bootstrap = 5,
};

constexpr std::uint64_t derive_seed(std::uint64_t master, SeedStream stream, std::uint64_t index) noexcept {
    return derive_seed(master, static_cast<std::uint64_t>(stream), index);
}

}  // namespace isoclock
