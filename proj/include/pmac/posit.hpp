#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "pmac/exact.hpp"

namespace pmac {

// One of the three supported posit formats: (8,0), (16,1), (32,2).
// No other (n, es) pair is constructible.
class PositFormat
{
public:
    static const PositFormat p8;
    static const PositFormat p16;
    static const PositFormat p32;

    static std::optional<PositFormat> parse(std::string_view name);  // "p8"/"p16"/"p32"

    int n() const { return n_; }
    int es() const { return es_; }
    int frac_width() const { return n_ - 1; }               // F: hidden bit + fraction register
    int sf_max() const { return (n_ - 2) << es_; }          // 6 / 28 / 120
    int sf_min() const { return -sf_max(); }
    int quire_width() const { return ((n_ - 2) << (es_ + 2)) + 1 + (n_ - 1); }  // 32 / 128 / 512

    uint32_t word_mask() const { return n_ == 32 ? 0xFFFFFFFFu : ((uint32_t{1} << n_) - 1); }
    uint32_t nar_pattern() const { return uint32_t{1} << (n_ - 1); }
    uint32_t maxpos_pattern() const { return (uint32_t{1} << (n_ - 1)) - 1; }
    uint32_t minpos_pattern() const { return 1; }
    uint32_t one_pattern() const { return uint32_t{1} << (n_ - 2); }
    int hex_digits() const { return n_ / 4; }

    std::string name() const;
    bool operator==(const PositFormat&) const = default;

private:
    constexpr PositFormat(int n, int es) : n_(n), es_(es) {}
    int n_;
    int es_;
};

enum class PositClass { Zero, NaR, Normal };

// An n-bit two's-complement posit pattern tagged with its format.
// Upper (32 - n) bits of `bits` are always zero.
struct PositWord
{
    uint32_t bits;
    PositFormat fmt;

    bool is_zero() const { return bits == 0; }
    bool is_nar() const { return bits == fmt.nar_pattern(); }
    bool operator==(const PositWord&) const = default;
};

// Unpacked posit fields. `frac` carries the explicit hidden bit at position
// F-1 and is left-aligned: fraction bits not present in the encoding are
// zero at the bottom, giving every format a uniform F-bit mantissa register.
struct DecodedPosit
{
    PositClass cls = PositClass::Zero;
    bool sign = false;
    int k = 0;        // regime value
    unsigned e = 0;   // exponent, es bits
    uint32_t frac = 0;
    int sf = 0;       // k * 2^es + e
};

// Total over all n-bit patterns: zero and NaR classified by pattern,
// negative patterns two's-complemented before field extraction.
DecodedPosit decode(PositWord w);

// Exact inverse of decode for legal decoded values.
PositWord encode(const DecodedPosit& d, PositFormat fmt);

// Stage-5 packing: builds the regime/exponent/fraction layout for sf, rounds
// to nearest with ties to the even pattern using guard/round/sticky bits cut
// off below the kept field, and applies the sign by two's complement.
//
// `frac64` is the normalized mantissa with the hidden bit at bit 63
// (value = frac64 * 2^(sf-63)); `sticky` ORs any bits lost below frac64.
// Finite magnitudes saturate at maxpos (never NaR); magnitudes at or below
// half of minpos round to zero, above it to minpos. Rounding is always
// performed on the positive encoding.
PositWord round_pack(bool sign, int sf, uint64_t frac64, bool sticky, PositFormat fmt);

// Exact value (-1)^s * 2^sf * 1.f as a dyadic rational. Throws on NaR.
Dyadic to_real(PositWord w);

// Fixed-width lowercase hex used by every file format and CLI surface:
// n/4 digits, e.g. "6c", "4000", "40000000".
std::string to_hex(PositWord w);
std::optional<uint32_t> parse_hex(std::string_view text, int digits);

uint32_t twos_complement(uint32_t bits, PositFormat fmt);

}  // namespace pmac
