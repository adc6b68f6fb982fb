#pragma once

#include <cstdint>

namespace dwis {

/// SplitMix64 finalizer; used to derive independent stream seeds from one master seed.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return mix_seed(mix_seed(master) ^ mix_seed(stream + 0x632be59bd9b4e019ULL));
}

// Stream identifiers for the independent random sources of one run.
enum class SeedStream : std::uint64_t {
    Field = 1,
    Sensors = 2,
    Pilot = 3,
    Evolution = 4,
};

constexpr std::uint64_t derive_seed(std::uint64_t master, SeedStream stream) {
    return derive_seed(master, static_cast<std::uint64_t>(stream));
}

} // namespace dwis
