#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace distclub
{
    // All randomness in the toolkit flows through this generator. Substreams are
    // derived from (seed, tag, index) so draws are independent of thread schedule,
    // worker count, and call order across unrelated components.
    class SplitMix64
    {
    public:
        explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

        std::uint64_t next()
        {
            std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
            z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
            z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
            return z ^ (z >> 31);
        }

        // Uniform in [0, 1) with 53 bits of precision.
        double uniform01()
        {
            return static_cast<double>(next() >> 11) * 0x1.0p-53;
        }

        // Uniform integer in [0, bound). bound must be positive.
        std::uint64_t below(std::uint64_t bound)
        {
            return static_cast<std::uint64_t>(
                (static_cast<unsigned __int128>(next()) * bound) >> 64);
        }

        // Standard normal via Box-Muller.
        double gaussian()
        {
            double u1 = 0.0;
            do
            {
                u1 = uniform01();
            } while (u1 == 0.0);
            const double u2 = uniform01();
            return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
        }

    private:
        std::uint64_t state_;
    };

    inline std::uint64_t hash_mix(std::uint64_t h, std::uint64_t v)
    {
        h ^= v + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
        std::uint64_t z = h;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Stream tags. Each independent consumer of randomness owns one.
    namespace stream_tag
    {
        inline constexpr std::uint64_t kTheta = 0x11;
        inline constexpr std::uint64_t kInteraction = 0x22;
        inline constexpr std::uint64_t kReward = 0x33;
        inline constexpr std::uint64_t kRandomPolicy = 0x44;
        inline constexpr std::uint64_t kDccbPhase = 0x55;
        inline constexpr std::uint64_t kPairSample = 0x66;
    }

    inline SplitMix64 substream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index = 0)
    {
        return SplitMix64(hash_mix(hash_mix(seed, tag), index));
    }

    // Fisher-Yates over [0, n).
    inline std::vector<int> shuffled_order(int n, SplitMix64 &rng)
    {
        std::vector<int> order(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
        {
            order[static_cast<std::size_t>(i)] = i;
        }
        for (int i = n - 1; i > 0; --i)
        {
            const auto j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i) + 1));
            std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
        }
        return order;
    }
}
