#pragma once

// Portable deterministic sampling helpers. The std distributions are
// implementation-defined, so anything that must reproduce byte-for-byte
// across toolchains goes through these instead.

#include <cstdint>
#include <random>
#include <span>

namespace ltlkit::detail {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) noexcept
{
    return splitmix64(a ^ splitmix64(b));
}

/// Uniform in [0, n).
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) noexcept
{
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(rng()) * n) >> 64);
}

/// Uniform in [lo, hi].
inline int uniform_int(Rng& rng, int lo, int hi) noexcept
{
    return lo + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(hi - lo + 1)));
}

/// Uniform in [0, 1).
inline double uniform_real(Rng& rng) noexcept
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Index drawn proportionally to nonnegative weights.
inline std::size_t weighted_index(Rng& rng, std::span<const double> weights) noexcept
{
    double total = 0;
    for (double w : weights)
        total += w;
    double r = uniform_real(rng) * total;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (r < weights[i])
            return i;
        r -= weights[i];
    }
    for (std::size_t i = weights.size(); i-- > 0;)
        if (weights[i] > 0)
            return i;
    return 0;
}

} // namespace ltlkit::detail
