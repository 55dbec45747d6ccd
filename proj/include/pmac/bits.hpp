#pragma once

#include <bit>
#include <cstdint>

namespace pmac {

// Index of the most significant set bit (0 = LSB). Undefined for x == 0.
inline int msb_index(uint64_t x) { return 63 - std::countl_zero(x); }

// Floor division for possibly-negative numerators (C++ '/' truncates).
inline int64_t floor_div(int64_t a, int64_t b)
{
    int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

inline uint32_t mask_bits(int width)
{
    return width >= 32 ? 0xFFFFFFFFu : ((uint32_t{1} << width) - 1u);
}

inline uint64_t mask_bits64(int width)
{
    return width >= 64 ? ~uint64_t{0} : ((uint64_t{1} << width) - 1u);
}

// splitmix64: the documented campaign generator. Chosen because its output
// is fully specified by these constants, so seeded runs reproduce across
// platforms and standard libraries.
inline uint64_t splitmix64(uint64_t& state)
{
    uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Small counter-seeded RNG wrapper: stream i of a campaign derives from
// (seed, i) alone, so vectors can be generated in any order or shard.
class SplitMix
{
public:
    explicit SplitMix(uint64_t seed) : state_(seed) {}
    SplitMix(uint64_t seed, uint64_t stream) : state_(seed ^ (0x9E3779B97F4A7C15ull * (stream + 1))) {}

    uint64_t next() { return splitmix64(state_); }

    // Uniform in [0, bound) by rejection; bound > 0.
    uint64_t below(uint64_t bound)
    {
        uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            uint64_t r = next();
            if (r >= threshold) return r % bound;
        }
    }

    // Uniform in [lo, hi] inclusive.
    int64_t range(int64_t lo, int64_t hi)
    {
        return lo + static_cast<int64_t>(below(static_cast<uint64_t>(hi - lo + 1)));
    }

    bool chance(uint32_t numer, uint32_t denom) { return below(denom) < numer; }

private:
    uint64_t state_;
};

}  // namespace pmac
