#pragma once

#include <cstdint>
#include <random>

namespace camref {

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Independent 64-bit stream seed for (seed, purpose, index).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t purpose, std::uint64_t index = 0) noexcept;

/// Counter-based uniform draw in [0, 1) keyed by (seed, epoch, item).
/// Pure function: the value for an item never depends on visiting order.
double keyed_uniform(std::uint64_t seed, std::uint64_t epoch, std::uint64_t item) noexcept;

using Engine = std::mt19937_64;

// Purpose tags for derive_seed.
namespace stream {
inline constexpr std::uint64_t synthetic_identity = 1;
inline constexpr std::uint64_t synthetic_camera = 2;
inline constexpr std::uint64_t synthetic_noise = 3;
inline constexpr std::uint64_t intra_shuffle = 4;
inline constexpr std::uint64_t inter_shuffle = 5;
inline constexpr std::uint64_t refinement = 6;
} // namespace stream

} // namespace camref
