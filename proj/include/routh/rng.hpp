#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace routh {

// splitmix64 finalizer; good avalanche, used to derive independent
// substream seeds from (seed, tag, index) triples.
inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag, std::uint64_t index)
{
    return splitmix64(splitmix64(splitmix64(seed) ^ tag) ^ index);
}

// Standard normal generator via Box-Muller on mt19937_64; explicit
// implementation (not std::normal_distribution) so that streams are
// bit-reproducible across standard libraries.
class NormalGen {
public:
    explicit NormalGen(std::uint64_t seed) : eng_(seed) {}

    double uniform01()
    {
        // (0, 1]: guard against log(0).
        return (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53;
    }

    double operator()()
    {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 6.283185307179586476925286766559 * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace routh
