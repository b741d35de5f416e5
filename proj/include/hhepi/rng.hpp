#pragma once

#include <cstdint>
#include <limits>

namespace hhepi {

/// SplitMix64 finaliser: a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z)
{
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Counter-based 64-bit generator. The n-th output of a stream is a pure
/// function of (key, n), so streams can be split off by index without any
/// shared state. Satisfies UniformRandomBitGenerator.
class Rng
{
  public:
    using result_type = std::uint64_t;

    explicit constexpr Rng(std::uint64_t key) : key_(mix64(key ^ 0x6A09E667F3BCC909ULL)) {}

    /// Independent substream for (seed, index).
    static constexpr Rng substream(std::uint64_t seed, std::uint64_t index)
    {
        return Rng(mix64(seed + 0x9E3779B97F4A7C15ULL) ^ mix64(index * 0xD1B54A32D192ED03ULL + 1));
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() { return mix64(key_ + mix64(counter_++)); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n), n > 0 (Lemire's multiply-shift with rejection).
    std::uint64_t below(std::uint64_t n)
    {
        auto x = (*this)();
        auto m = static_cast<unsigned __int128>(x) * n;
        auto low = static_cast<std::uint64_t>(m);
        if (low < n) {
            const std::uint64_t threshold = (0 - n) % n;
            while (low < threshold) {
                x = (*this)();
                m = static_cast<unsigned __int128>(x) * n;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    constexpr std::uint64_t counter() const { return counter_; }

  private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace hhepi
