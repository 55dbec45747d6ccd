#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pmac {

// Arbitrary-precision signed integer, sign-magnitude over 64-bit limbs.
// Only the operations the exact-arithmetic oracle needs: add/sub, shifts,
// comparison, small division (for decimal printing and tie-case factoring).
class BigInt
{
public:
    BigInt() = default;
    BigInt(int64_t v);
    static BigInt from_u64(uint64_t v);
    static BigInt from_i128(__int128 v);
    // Two's-complement little-endian limbs of the given bit width.
    static BigInt from_twos_complement(const uint64_t* limbs, int width_bits);

    bool is_zero() const { return mag_.empty(); }
    int signum() const { return mag_.empty() ? 0 : (neg_ ? -1 : 1); }
    bool negative() const { return neg_; }
    // Number of bits in the magnitude; 0 for zero.
    int bit_length() const;
    bool bit(int i) const;
    int trailing_zero_bits() const;  // undefined for zero
    bool is_odd() const { return !mag_.empty() && (mag_[0] & 1); }

    BigInt operator-() const;
    BigInt abs() const;
    BigInt operator+(const BigInt& o) const;
    BigInt operator-(const BigInt& o) const;
    BigInt operator<<(int bits) const;
    BigInt operator>>(int bits) const;  // magnitude shift; exact use only

    bool operator==(const BigInt& o) const { return neg_ == o.neg_ && mag_ == o.mag_; }
    bool operator!=(const BigInt& o) const { return !(*this == o); }
    // -1 / 0 / +1 for this <,==,> o.
    int compare(const BigInt& o) const;
    int compare_abs(const BigInt& o) const { return cmp_mag(mag_, o.mag_); }

    // Divide magnitude by a small divisor; returns remainder. Sign kept.
    uint64_t divmod_u64(uint64_t divisor);
    uint64_t mod_u64(uint64_t divisor) const;

    // Low 64 bits of the magnitude (0 for zero).
    uint64_t low_u64() const { return mag_.empty() ? 0 : mag_[0]; }

    std::string to_decimal() const;
    std::string to_hex() const;  // magnitude with sign prefix

private:
    std::vector<uint64_t> mag_;  // little-endian, no leading zero limbs
    bool neg_ = false;           // false when zero

    void trim();
    static int cmp_mag(const std::vector<uint64_t>& a, const std::vector<uint64_t>& b);
    static std::vector<uint64_t> add_mag(const std::vector<uint64_t>& a, const std::vector<uint64_t>& b);
    // Requires |a| >= |b|.
    static std::vector<uint64_t> sub_mag(const std::vector<uint64_t>& a, const std::vector<uint64_t>& b);
};

// Exact dyadic rational num * 2^exp, normalized so num is odd (or zero with
// exp == 0). Closed under the operations a posit MAC needs: every posit
// value, every product of two posits, and every finite sum of products is
// dyadic, so the oracle never rounds.
class Dyadic
{
public:
    Dyadic() = default;
    Dyadic(BigInt num, int64_t exp);
    static Dyadic from_int(int64_t v) { return Dyadic(BigInt(v), 0); }
    // Exact conversion; v must be finite.
    static Dyadic from_double(double v);

    bool is_zero() const { return num_.is_zero(); }
    int signum() const { return num_.signum(); }
    const BigInt& num() const { return num_; }
    int64_t exp() const { return exp_; }

    Dyadic operator-() const { return Dyadic(-num_, exp_); }
    Dyadic abs() const { return Dyadic(num_.abs(), exp_); }
    Dyadic operator+(const Dyadic& o) const;
    Dyadic operator-(const Dyadic& o) const;
    // Product; both operands' numerators must fit in 64 bits (true for all
    // posit mantissas), which keeps the oracle free of general bignum
    // multiplication.
    Dyadic mul_small(const Dyadic& o) const;
    Dyadic half() const { return is_zero() ? Dyadic() : Dyadic(num_, exp_ - 1); }

    bool operator==(const Dyadic& o) const { return num_ == o.num_ && exp_ == o.exp_; }
    bool operator!=(const Dyadic& o) const { return !(*this == o); }
    int compare(const Dyadic& o) const;

    double to_double_approx() const;
    // "7/2", "-1/64", "3" -- numerator / power-of-two denominator.
    std::string to_fraction_string() const;

private:
    BigInt num_;
    int64_t exp_ = 0;

    void normalize();
};

}  // namespace pmac
