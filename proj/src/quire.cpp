#include "pmac/quire.hpp"

#include <bit>
#include <cassert>

#include "pmac/bits.hpp"

namespace pmac {

namespace {
int active_limbs(int width) { return (width + 63) / 64; }
}

bool Quire::is_zero_value() const
{
    for (uint64_t limb : acc_)
        if (limb) return false;
    return true;
}

bool Quire::msb() const
{
    int w = width();
    return (acc_[(w - 1) / 64] >> ((w - 1) % 64)) & 1;
}

void Quire::mask_to_width()
{
    int w = width();
    for (int i = active_limbs(w); i < 8; ++i) acc_[i] = 0;
    int top_bits = w % 64;
    if (top_bits) acc_[w / 64] &= mask_bits64(top_bits);
}

void Quire::add_limbs(const std::array<uint64_t, 8>& addend)
{
    bool sa = msb();
    int w = width();
    bool sb = (addend[(w - 1) / 64] >> ((w - 1) % 64)) & 1;

    unsigned __int128 carry = 0;
    for (int i = 0; i < active_limbs(w); ++i) {
        unsigned __int128 s = carry + acc_[i] + addend[i];
        acc_[i] = static_cast<uint64_t>(s);
        carry = s >> 64;
    }
    mask_to_width();

    // Same-sign operands flipping the result sign means the W-bit register
    // wrapped; latch it for the debug surface.
    if (sa == sb && msb() != sa) wrapped_ = true;
}

void Quire::add_scaled_product(bool negative, uint64_t mant_product, int sf_sum, bool enable)
{
    if (!enable || mant_product == 0) return;

    // Placement: the product of two F-bit left-aligned mantissas carries
    // 2F-2 fraction bits, and the quire LSB weighs 2^(-2*sf_max). A right
    // placement only discards left-alignment padding (posit fraction fields
    // shrink as |sf| grows, keeping sf - f >= -sf_max per operand).
    int shift = sf_sum + 2 * fmt_.sf_max() - (2 * fmt_.frac_width() - 2);
    std::array<uint64_t, 8> addend{};
    if (shift >= 0) {
        assert(shift + 64 < 8 * 64);
        addend[shift / 64] = mant_product << (shift % 64);
        if (shift % 64)
            addend[shift / 64 + 1] = mant_product >> (64 - shift % 64);
    } else {
        assert(-shift < 64 && (mant_product & mask_bits64(-shift)) == 0);
        addend[0] = mant_product >> -shift;
    }

    if (negative) {
        // Two's-complement negate across the active width.
        uint64_t carry = 1;
        for (int i = 0; i < active_limbs(width()); ++i) {
            addend[i] = ~addend[i] + carry;
            carry = (carry && addend[i] == 0) ? 1 : 0;
        }
        int top_bits = width() % 64;
        if (top_bits) addend[width() / 64] &= mask_bits64(top_bits);
    }
    add_limbs(addend);
}

void Quire::add_product(const DecodedPosit& a, const DecodedPosit& b, bool enable)
{
    if (!enable) return;
    if (a.cls == PositClass::NaR || b.cls == PositClass::NaR) {
        nar_ = true;
        return;
    }
    if (a.cls == PositClass::Zero || b.cls == PositClass::Zero) return;
    uint64_t product = static_cast<uint64_t>(a.frac) * static_cast<uint64_t>(b.frac);
    add_scaled_product(a.sign != b.sign, product, a.sf + b.sf, enable);
}

Quire::Normalized Quire::normalize() const
{
    Normalized n;
    n.nar = nar_;
    if (nar_ || is_zero_value()) return n;
    n.zero = false;
    n.sign = msb();

    // Magnitude of the W-bit two's-complement value; the most negative
    // value's magnitude still fits in W unsigned bits.
    std::array<uint64_t, 8> mag = acc_;
    if (n.sign) {
        uint64_t carry = 1;
        for (int i = 0; i < active_limbs(width()); ++i) {
            mag[i] = ~mag[i] + carry;
            carry = (carry && mag[i] == 0) ? 1 : 0;
        }
        int top_bits = width() % 64;
        if (top_bits) mag[width() / 64] &= mask_bits64(top_bits);
    }

    int top = -1;
    for (int i = 7; i >= 0; --i) {
        if (mag[i]) {
            top = i * 64 + msb_index(mag[i]);
            break;
        }
    }
    assert(top >= 0);
    n.sf = top - 2 * fmt_.sf_max();

    // Hidden bit to bit 63: gather the 64 bits below-and-including the
    // leading one, sticky the rest.
    for (int bit = 0; bit < 64; ++bit) {
        int src = top - bit;
        if (src < 0) break;
        if ((mag[src / 64] >> (src % 64)) & 1) n.frac64 |= uint64_t{1} << (63 - bit);
    }
    for (int src = top - 64; src >= 0; --src) {
        if ((mag[src / 64] >> (src % 64)) & 1) {
            n.sticky = true;
            break;
        }
    }
    return n;
}

PositWord Quire::to_posit() const
{
    if (nar_) return PositWord{fmt_.nar_pattern(), fmt_};
    Normalized n = normalize();
    if (n.zero) return PositWord{0, fmt_};
    return round_pack(n.sign, n.sf, n.frac64, n.sticky, fmt_);
}

std::string Quire::hex() const
{
    static const char* hexd = "0123456789abcdef";
    int digits = width() / 4;
    std::string out(digits, '0');
    for (int i = 0; i < digits; ++i) {
        int nib = (acc_[i / 16] >> (4 * (i % 16))) & 0xF;
        out[digits - 1 - i] = hexd[nib];
    }
    return out;
}

}  // namespace pmac
