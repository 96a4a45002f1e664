#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace seqcal {

/// Identifier recorded in every output file for the uniform generator below.
inline constexpr std::string_view kGeneratorId = "mt19937_64/seed_seq(seed,stream)/53bit-midpoint";

/// Seedable uniform stream on (0,1).
///
/// Both mt19937_64 and std::seed_seq are fully specified by the standard, so
/// a (seed, stream) pair yields the same numbers on every conforming platform.
/// Doubles are formed from the top 53 bits plus one half-ulp, never 0 or 1.
class UniformStream {
public:
    UniformStream(std::uint64_t seed, std::uint64_t stream)
    {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
        engine_.seed(seq);
    }

    double operator()() noexcept
    {
        constexpr double scale = 0x1.0p-53;
        return (static_cast<double>(engine_() >> 11) + 0.5) * scale;
    }

private:
    std::mt19937_64 engine_;
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derives a child seed from a parent seed and a task path (n, repeat, ...),
/// so results never depend on scheduling order.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) noexcept
{
    std::uint64_t h = mix64(seed);
    for (auto p : path)
        h = mix64(h ^ mix64(p + 0x632be59bd9b4e019ULL));
    return h;
}

} // namespace seqcal
