#include "pmac/exact.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace pmac {

// ---------------------------------------------------------------- BigInt --

BigInt::BigInt(int64_t v)
{
    if (v == 0) return;
    neg_ = v < 0;
    uint64_t mag = neg_ ? (~static_cast<uint64_t>(v) + 1) : static_cast<uint64_t>(v);
    mag_.push_back(mag);
}

BigInt BigInt::from_u64(uint64_t v)
{
    BigInt r;
    if (v) r.mag_.push_back(v);
    return r;
}

BigInt BigInt::from_i128(__int128 v)
{
    BigInt r;
    if (v == 0) return r;
    r.neg_ = v < 0;
    unsigned __int128 mag = r.neg_ ? (~static_cast<unsigned __int128>(v) + 1)
                                   : static_cast<unsigned __int128>(v);
    r.mag_.push_back(static_cast<uint64_t>(mag));
    if (mag >> 64) r.mag_.push_back(static_cast<uint64_t>(mag >> 64));
    return r;
}

BigInt BigInt::from_twos_complement(const uint64_t* limbs, int width_bits)
{
    assert(width_bits > 0);
    int nlimbs = (width_bits + 63) / 64;
    bool neg = (limbs[(width_bits - 1) / 64] >> ((width_bits - 1) % 64)) & 1;
    BigInt r;
    r.mag_.assign(limbs, limbs + nlimbs);
    // Mask partial top limb, sign-extending when negative.
    int top_bits = width_bits - 64 * (nlimbs - 1);
    if (top_bits < 64) {
        uint64_t m = (uint64_t{1} << top_bits) - 1;
        r.mag_.back() &= m;
        if (neg) r.mag_.back() |= ~m;
    }
    if (neg) {
        // Negate: invert all limbs, add one.
        uint64_t carry = 1;
        for (auto& limb : r.mag_) {
            limb = ~limb + carry;
            carry = (carry && limb == 0) ? 1 : 0;
        }
        r.neg_ = true;
    }
    r.trim();
    return r;
}

void BigInt::trim()
{
    while (!mag_.empty() && mag_.back() == 0) mag_.pop_back();
    if (mag_.empty()) neg_ = false;
}

int BigInt::bit_length() const
{
    if (mag_.empty()) return 0;
    return 64 * static_cast<int>(mag_.size() - 1) + 64 - std::countl_zero(mag_.back());
}

bool BigInt::bit(int i) const
{
    size_t limb = static_cast<size_t>(i) / 64;
    if (limb >= mag_.size()) return false;
    return (mag_[limb] >> (i % 64)) & 1;
}

int BigInt::trailing_zero_bits() const
{
    assert(!mag_.empty());
    int n = 0;
    for (uint64_t limb : mag_) {
        if (limb == 0) { n += 64; continue; }
        return n + std::countr_zero(limb);
    }
    return n;
}

BigInt BigInt::operator-() const
{
    BigInt r = *this;
    if (!r.mag_.empty()) r.neg_ = !r.neg_;
    return r;
}

BigInt BigInt::abs() const
{
    BigInt r = *this;
    r.neg_ = false;
    return r;
}

int BigInt::cmp_mag(const std::vector<uint64_t>& a, const std::vector<uint64_t>& b)
{
    if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
    for (size_t i = a.size(); i-- > 0;) {
        if (a[i] != b[i]) return a[i] < b[i] ? -1 : 1;
    }
    return 0;
}

std::vector<uint64_t> BigInt::add_mag(const std::vector<uint64_t>& a, const std::vector<uint64_t>& b)
{
    const auto& big = a.size() >= b.size() ? a : b;
    const auto& small = a.size() >= b.size() ? b : a;
    std::vector<uint64_t> r(big.size(), 0);
    unsigned __int128 carry = 0;
    for (size_t i = 0; i < big.size(); ++i) {
        unsigned __int128 s = carry + big[i] + (i < small.size() ? small[i] : 0);
        r[i] = static_cast<uint64_t>(s);
        carry = s >> 64;
    }
    if (carry) r.push_back(static_cast<uint64_t>(carry));
    return r;
}

std::vector<uint64_t> BigInt::sub_mag(const std::vector<uint64_t>& a, const std::vector<uint64_t>& b)
{
    std::vector<uint64_t> r(a.size(), 0);
    uint64_t borrow = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        uint64_t bi = i < b.size() ? b[i] : 0;
        uint64_t d = a[i] - bi;
        uint64_t borrow2 = (a[i] < bi) || (borrow && d == 0);
        r[i] = d - borrow;
        borrow = borrow2;
    }
    assert(borrow == 0);
    return r;
}

BigInt BigInt::operator+(const BigInt& o) const
{
    BigInt r;
    if (neg_ == o.neg_) {
        r.mag_ = add_mag(mag_, o.mag_);
        r.neg_ = neg_;
    } else {
        int c = cmp_mag(mag_, o.mag_);
        if (c == 0) return r;
        if (c > 0) {
            r.mag_ = sub_mag(mag_, o.mag_);
            r.neg_ = neg_;
        } else {
            r.mag_ = sub_mag(o.mag_, mag_);
            r.neg_ = o.neg_;
        }
    }
    r.trim();
    return r;
}

BigInt BigInt::operator-(const BigInt& o) const { return *this + (-o); }

BigInt BigInt::operator<<(int bits) const
{
    if (mag_.empty() || bits == 0) return *this;
    assert(bits > 0);
    int limb_shift = bits / 64;
    int bit_shift = bits % 64;
    BigInt r;
    r.neg_ = neg_;
    r.mag_.assign(mag_.size() + limb_shift + 1, 0);
    for (size_t i = 0; i < mag_.size(); ++i) {
        r.mag_[i + limb_shift] |= mag_[i] << bit_shift;
        if (bit_shift) r.mag_[i + limb_shift + 1] |= mag_[i] >> (64 - bit_shift);
    }
    r.trim();
    return r;
}

BigInt BigInt::operator>>(int bits) const
{
    if (mag_.empty() || bits == 0) return *this;
    assert(bits > 0);
    int limb_shift = bits / 64;
    int bit_shift = bits % 64;
    BigInt r;
    if (static_cast<size_t>(limb_shift) >= mag_.size()) return r;
    r.neg_ = neg_;
    r.mag_.assign(mag_.size() - limb_shift, 0);
    for (size_t i = 0; i < r.mag_.size(); ++i) {
        r.mag_[i] = mag_[i + limb_shift] >> bit_shift;
        if (bit_shift && i + limb_shift + 1 < mag_.size())
            r.mag_[i] |= mag_[i + limb_shift + 1] << (64 - bit_shift);
    }
    r.trim();
    return r;
}

int BigInt::compare(const BigInt& o) const
{
    if (neg_ != o.neg_) return neg_ ? -1 : 1;
    int c = cmp_mag(mag_, o.mag_);
    return neg_ ? -c : c;
}

uint64_t BigInt::divmod_u64(uint64_t divisor)
{
    assert(divisor != 0);
    unsigned __int128 rem = 0;
    for (size_t i = mag_.size(); i-- > 0;) {
        unsigned __int128 cur = (rem << 64) | mag_[i];
        mag_[i] = static_cast<uint64_t>(cur / divisor);
        rem = cur % divisor;
    }
    trim();
    return static_cast<uint64_t>(rem);
}

uint64_t BigInt::mod_u64(uint64_t divisor) const
{
    assert(divisor != 0);
    unsigned __int128 rem = 0;
    for (size_t i = mag_.size(); i-- > 0;) {
        rem = ((rem << 64) | mag_[i]) % divisor;
    }
    return static_cast<uint64_t>(rem);
}

std::string BigInt::to_decimal() const
{
    if (mag_.empty()) return "0";
    BigInt tmp = abs();
    std::string digits;
    while (!tmp.is_zero()) {
        uint64_t chunk = tmp.divmod_u64(10000000000000000000ull);  // 10^19
        for (int i = 0; i < 19; ++i) {
            digits.push_back(static_cast<char>('0' + chunk % 10));
            chunk /= 10;
        }
    }
    while (digits.size() > 1 && digits.back() == '0') digits.pop_back();
    if (neg_) digits.push_back('-');
    std::reverse(digits.begin(), digits.end());
    return digits;
}

std::string BigInt::to_hex() const
{
    if (mag_.empty()) return "0";
    static const char* hexd = "0123456789abcdef";
    std::string out;
    if (neg_) out.push_back('-');
    bool leading = true;
    for (size_t i = mag_.size(); i-- > 0;) {
        for (int nib = 15; nib >= 0; --nib) {
            int d = (mag_[i] >> (4 * nib)) & 0xF;
            if (leading && d == 0 && !(i == 0 && nib == 0)) continue;
            leading = false;
            out.push_back(hexd[d]);
        }
    }
    return out;
}

// ---------------------------------------------------------------- Dyadic --

Dyadic::Dyadic(BigInt num, int64_t exp) : num_(std::move(num)), exp_(exp) { normalize(); }

void Dyadic::normalize()
{
    if (num_.is_zero()) {
        exp_ = 0;
        return;
    }
    int tz = num_.trailing_zero_bits();
    if (tz) {
        num_ = num_ >> tz;
        exp_ += tz;
    }
}

Dyadic Dyadic::from_double(double v)
{
    if (!std::isfinite(v)) throw std::invalid_argument("Dyadic::from_double: non-finite");
    if (v == 0.0) return Dyadic();
    int e = 0;
    double m = std::frexp(v, &e);                    // v = m * 2^e, 0.5 <= |m| < 1
    int64_t mant = static_cast<int64_t>(std::ldexp(m, 53));  // exact: 53-bit mantissa
    return Dyadic(BigInt(mant), e - 53);
}

Dyadic Dyadic::operator+(const Dyadic& o) const
{
    if (is_zero()) return o;
    if (o.is_zero()) return *this;
    int64_t e = std::min(exp_, o.exp_);
    BigInt a = num_ << static_cast<int>(exp_ - e);
    BigInt b = o.num_ << static_cast<int>(o.exp_ - e);
    return Dyadic(a + b, e);
}

Dyadic Dyadic::operator-(const Dyadic& o) const { return *this + (-o); }

Dyadic Dyadic::mul_small(const Dyadic& o) const
{
    if (is_zero() || o.is_zero()) return Dyadic();
    assert(num_.bit_length() <= 64 && o.num_.bit_length() <= 64);
    __int128 p = static_cast<__int128>(num_.low_u64()) * static_cast<__int128>(o.num_.low_u64());
    if (signum() * o.signum() < 0) p = -p;
    return Dyadic(BigInt::from_i128(p), exp_ + o.exp_);
}

int Dyadic::compare(const Dyadic& o) const
{
    int sa = signum(), sb = o.signum();
    if (sa != sb) return sa < sb ? -1 : 1;
    if (sa == 0) return 0;
    return (*this - o).signum();
}

double Dyadic::to_double_approx() const
{
    if (is_zero()) return 0.0;
    int bl = num_.bit_length();
    // Take the top 62 bits of the numerator, track the dropped scale.
    int drop = bl > 62 ? bl - 62 : 0;
    BigInt top = num_.abs() >> drop;
    double m = static_cast<double>(top.low_u64());
    if (num_.negative()) m = -m;
    return std::ldexp(m, static_cast<int>(exp_) + drop);
}

std::string Dyadic::to_fraction_string() const
{
    if (is_zero()) return "0";
    if (exp_ >= 0) return (num_ << static_cast<int>(exp_)).to_decimal();
    BigInt den = BigInt(1) << static_cast<int>(-exp_);
    return num_.to_decimal() + "/" + den.to_decimal();
}

}  // namespace pmac
