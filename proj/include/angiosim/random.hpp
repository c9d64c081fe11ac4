#pragma once

#include <cstdint>
#include <random>

namespace angiosim {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Counter-based child seed: stream `index` of `parent`. Distinct indices give
/// distinct seeds for a fixed parent because mix64 is a bijection.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) noexcept {
    return mix64(mix64(parent) ^ (index * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL));
}

// Sub-streams used by the per-image renderer.
enum class Stream : std::uint64_t { Label = 0, Curve = 1, Rotation = 2, EdgeNoise = 3 };

inline Rng make_stream(std::uint64_t seed, Stream which) {
    return Rng(derive_seed(seed, static_cast<std::uint64_t>(which)));
}

/// Uniform double on [lo, hi]; degenerate ranges return lo.
inline double uniform(Rng& rng, double lo, double hi) {
    const double u = std::generate_canonical<double, 53>(rng);
    return lo + (hi - lo) * u;
}

}  // namespace angiosim
