#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "pmac/posit.hpp"

namespace pmac {

// Wide fixed-point accumulator for exact, rounding-free accumulation of
// posit products. The register is a W-bit two's-complement integer holding
// value * 2^(2*sf_max), so its LSB carries minpos^2 and the n-1 guard bits
// above the data field absorb carries from repeated maximal products.
// W = 2^(es+2)*(n-2) + 1 + (n-1): 32 / 128 / 512 bits for the three formats.
//
// Quire is a plain value: copy freely, compare bitwise. Overflow past W bits
// wraps like the hardware register and latches a separate debug flag; NaR is
// a sticky flag rather than an in-band pattern and wins at readout.
class Quire
{
public:
    static Quire zero(PositFormat fmt) { return Quire(fmt); }

    PositFormat format() const { return fmt_; }
    int width() const { return fmt_.quire_width(); }
    bool is_nar() const { return nar_; }
    bool wrapped() const { return wrapped_; }
    bool is_zero_value() const;

    // Accumulates the exact product a*b, gated by `enable` (bypass leaves
    // the quire untouched, NaR flag included). NaR operands poison the
    // quire; zero operands contribute nothing. The product's mantissa is
    // placed by the scale-factor sum; right placements only ever drop the
    // zero padding of the left-aligned mantissas, so accumulation is exact.
    void add_product(const DecodedPosit& a, const DecodedPosit& b, bool enable);

    // Same accumulation from already-multiplied mantissas (the engine's
    // stage 3, fed by the SIMD multiplier). `mant_product` is the 2F-bit
    // product of the two hidden-bit mantissas, `sf_sum` the scale-factor
    // sum, `negative` the product sign.
    void add_scaled_product(bool negative, uint64_t mant_product, int sf_sum, bool enable);

    void poison() { nar_ = true; }

    // Stage 4: sign/leading-one normalization of the accumulator into a
    // mantissa register plus scale factor, no rounding yet.
    struct Normalized
    {
        bool zero = true;
        bool nar = false;
        bool sign = false;
        int sf = 0;
        uint64_t frac64 = 0;  // hidden bit at bit 63
        bool sticky = false;  // accumulator bits below frac64
    };
    Normalized normalize() const;

    // Stages 4+5: normalize then round-pack into the quire's format.
    PositWord to_posit() const;

    // Full-width two's-complement dump, W/4 lowercase hex digits.
    std::string hex() const;

    bool operator==(const Quire& o) const = default;

    // Exposed for the exactness oracle in tests: little-endian limbs of the
    // W-bit two's-complement accumulator.
    const std::array<uint64_t, 8>& limbs() const { return acc_; }

private:
    explicit Quire(PositFormat fmt) : fmt_(fmt) {}

    std::array<uint64_t, 8> acc_{};  // little-endian; only width() bits live
    PositFormat fmt_ = PositFormat::p8;
    bool nar_ = false;
    bool wrapped_ = false;

    bool msb() const;
    void add_limbs(const std::array<uint64_t, 8>& addend);
    void mask_to_width();
};

}  // namespace pmac
