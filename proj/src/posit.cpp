#include "pmac/posit.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <stdexcept>

#include "pmac/bits.hpp"

namespace pmac {

const PositFormat PositFormat::p8{8, 0};
const PositFormat PositFormat::p16{16, 1};
const PositFormat PositFormat::p32{32, 2};

std::optional<PositFormat> PositFormat::parse(std::string_view name)
{
    if (name == "p8") return p8;
    if (name == "p16") return p16;
    if (name == "p32") return p32;
    return std::nullopt;
}

std::string PositFormat::name() const
{
    return n_ == 8 ? "p8" : n_ == 16 ? "p16" : "p32";
}

uint32_t twos_complement(uint32_t bits, PositFormat fmt)
{
    return (~bits + 1) & fmt.word_mask();
}

DecodedPosit decode(PositWord w)
{
    const PositFormat fmt = w.fmt;
    assert((w.bits & ~fmt.word_mask()) == 0);

    DecodedPosit d;
    if (w.bits == 0) {
        d.cls = PositClass::Zero;
        return d;
    }
    if (w.bits == fmt.nar_pattern()) {
        d.cls = PositClass::NaR;
        return d;
    }

    d.cls = PositClass::Normal;
    d.sign = (w.bits >> (fmt.n() - 1)) & 1;
    uint32_t mag = d.sign ? twos_complement(w.bits, fmt) : w.bits;

    const int nb = fmt.n() - 1;  // bits after the sign
    // Left-align the post-sign body at bit 31; low bits fill with zeros.
    uint32_t body = mag << (32 - nb);

    // Regime: run of identical bits terminated by the opposite bit. The
    // zero fill below the body terminates an all-ones run at exactly nb.
    bool r0 = body >> 31;
    uint32_t probe = r0 ? ~body : body;
    int run = probe == 0 ? 32 : std::countl_zero(probe);
    if (run > nb) run = nb;
    d.k = r0 ? run - 1 : -run;

    // Bits remaining after regime run + terminator.
    int rem = nb - run - 1;
    uint32_t aligned = rem > 0 ? body << (run + 1) : 0;

    // Exponent: next es bits. When the regime truncates it, the surviving
    // high bits land in place and the missing low bits read as zero.
    d.e = fmt.es() > 0 ? aligned >> (32 - fmt.es()) : 0;
    d.sf = (d.k << fmt.es()) + static_cast<int>(d.e);

    uint32_t frac_field = fmt.es() > 0 ? aligned << fmt.es() : aligned;
    const int fw = fmt.frac_width();
    d.frac = (uint32_t{1} << (fw - 1)) | (frac_field >> (32 - (fw - 1)));
    return d;
}

PositWord encode(const DecodedPosit& d, PositFormat fmt)
{
    if (d.cls == PositClass::Zero) return PositWord{0, fmt};
    if (d.cls == PositClass::NaR) return PositWord{fmt.nar_pattern(), fmt};

    const int nb = fmt.n() - 1;
    assert(d.k >= -(nb - 1) && d.k <= nb - 1);
    assert(d.frac >> (fmt.frac_width() - 1) == 1);

    // Assemble [regime | exponent | fraction] left-aligned at bit 31, then
    // keep the top nb bits. Legal decoded values have zeros in everything
    // the regime pushes off the end.
    uint64_t field = 0;
    int len;
    if (d.k >= 0) {
        len = d.k + 2;
        field = ((uint64_t{1} << (d.k + 1)) - 1) << 1;  // ones then terminator 0
    } else {
        len = -d.k + 1;
        field = 1;  // zeros then terminator 1
    }
    field = (field << fmt.es()) | d.e;
    len += fmt.es();
    // Fraction bits below the hidden bit.
    uint32_t frac_low = d.frac & mask_bits(fmt.frac_width() - 1);
    field = (field << (fmt.frac_width() - 1)) | frac_low;
    len += fmt.frac_width() - 1;

    assert(len >= nb && len <= 64);
    uint32_t pattern = static_cast<uint32_t>(field >> (len - nb));
    if (d.sign) pattern = twos_complement(pattern, fmt);
    return PositWord{pattern & fmt.word_mask(), fmt};
}

namespace {

uint32_t apply_sign(uint32_t pattern, bool sign, PositFormat fmt)
{
    return (sign && pattern) ? twos_complement(pattern, fmt) : pattern;
}

// Compares the magnitude frac64 * 2^(sf-63) (plus a sticky tail) against the
// midpoint of two adjacent non-negative patterns lo and lo+1. Returns the
// rounding decision: +1 round up, 0 exact tie, -1 round down. Everything
// fits in 128 bits because posit mantissas are at most 31 bits wide and
// adjacent patterns are at most a few binades apart.
int compare_to_midpoint(int sf, uint64_t frac64, bool sticky, uint32_t lo, PositFormat fmt)
{
    const int fshift = fmt.frac_width() - 1;
    unsigned __int128 mid;
    int64_t mid_exp;
    DecodedPosit dh = decode(PositWord{lo + 1, fmt});
    int64_t eh = dh.sf - fshift;
    if (lo == 0) {
        mid = dh.frac;
        mid_exp = eh - 1;
    } else {
        DecodedPosit dl = decode(PositWord{lo, fmt});
        int64_t el = dl.sf - fshift;
        int64_t ec = std::min(el, eh);
        mid = (static_cast<unsigned __int128>(dl.frac) << (el - ec)) +
              (static_cast<unsigned __int128>(dh.frac) << (eh - ec));
        mid_exp = ec - 1;
    }
    int64_t v_exp = static_cast<int64_t>(sf) - 63;
    assert(mid_exp >= v_exp && mid_exp - v_exp < 80);
    unsigned __int128 m = mid << (mid_exp - v_exp);
    unsigned __int128 v = frac64;
    if (v > m) return 1;
    if (v < m) return -1;
    return sticky ? 1 : 0;
}

}  // namespace

PositWord round_pack(bool sign, int sf, uint64_t frac64, bool sticky, PositFormat fmt)
{
    if (frac64 == 0) {
        assert(!sticky);
        return PositWord{0, fmt};
    }
    assert(frac64 >> 63);  // normalized

    const int nb = fmt.n() - 1;
    const int es = fmt.es();
    // No overflow to NaR and no underflow past the zero/minpos boundary:
    // finite magnitudes saturate at maxpos, and anything at or below half of
    // minpos rounds to zero (the half-minpos tie goes to the even pattern,
    // which is zero).
    if (sf > fmt.sf_max())
        return PositWord{apply_sign(fmt.maxpos_pattern(), sign, fmt), fmt};
    int k = static_cast<int>(floor_div(sf, int64_t{1} << es));
    if (k < -nb) return PositWord{0, fmt};

    // Materialize the pattern layout MSB-first in a 128-bit register:
    // regime run, terminator, exponent, then the 63 mantissa fraction bits.
    // Its top nb bits are the largest pattern not above the value (pattern
    // order is value order, hardware's left-to-right priority encoding).
    unsigned __int128 str = 0;
    int pos = 0;  // next free position counted from the MSB
    auto put = [&str, &pos](uint64_t value, int width) {
        str |= static_cast<unsigned __int128>(value) << (128 - pos - width);
        pos += width;
    };
    if (k >= 0) {
        put((uint64_t{1} << (k + 1)) - 1, k + 1);
        put(0, 1);
    } else {
        put(1, -k + 1);
    }
    if (es) put(static_cast<unsigned>(sf - (k << es)), es);
    put(frac64 & mask_bits64(63), 63);

    uint32_t kept = static_cast<uint32_t>(str >> (128 - nb));
    if (kept >= fmt.maxpos_pattern())
        return PositWord{apply_sign(fmt.maxpos_pattern(), sign, fmt), fmt};

    // Round to nearest against the exact midpoint of the two neighbors,
    // ties to the pattern with even last bit. Where fraction bits survive
    // in the encoding this is exactly guard/round/sticky RNE; where the
    // regime squeezes them out the midpoint is no longer halfway through
    // the discarded tail, so the comparison is done in value space.
    int c = compare_to_midpoint(sf, frac64, sticky, kept, fmt);
    if (c > 0 || (c == 0 && (kept & 1))) ++kept;
    return PositWord{apply_sign(kept, sign, fmt), fmt};
}

Dyadic to_real(PositWord w)
{
    if (w.is_zero()) return Dyadic();
    if (w.is_nar()) throw std::domain_error("to_real: NaR has no real value");
    DecodedPosit d = decode(w);
    int64_t mant = d.sign ? -static_cast<int64_t>(d.frac) : static_cast<int64_t>(d.frac);
    return Dyadic(BigInt(mant), d.sf - (w.fmt.frac_width() - 1));
}

std::string to_hex(PositWord w)
{
    static const char* hexd = "0123456789abcdef";
    std::string out(w.fmt.hex_digits(), '0');
    uint32_t v = w.bits;
    for (int i = w.fmt.hex_digits(); i-- > 0;) {
        out[i] = hexd[v & 0xF];
        v >>= 4;
    }
    return out;
}

std::optional<uint32_t> parse_hex(std::string_view text, int digits)
{
    if (static_cast<int>(text.size()) != digits) return std::nullopt;
    uint32_t v = 0;
    for (char c : text) {
        int d;
        if (c >= '0' && c <= '9') d = c - '0';
        else if (c >= 'a' && c <= 'f') d = c - 'a' + 10;
        else if (c >= 'A' && c <= 'F') d = c - 'A' + 10;
        else return std::nullopt;
        v = (v << 4) | static_cast<uint32_t>(d);
    }
    return v;
}

}  // namespace pmac
