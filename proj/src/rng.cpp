#include "camref/rng.hpp"

namespace camref {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t purpose, std::uint64_t index) noexcept {
    return splitmix64(splitmix64(splitmix64(seed) ^ purpose) ^ index);
}

double keyed_uniform(std::uint64_t seed, std::uint64_t epoch, std::uint64_t item) noexcept {
    const std::uint64_t bits = derive_seed(seed ^ 0x5851f42d4c957f2dULL, epoch, item);
    // 53 high bits -> [0, 1)
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

} // namespace camref
