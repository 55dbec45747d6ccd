#include <doctest.h>

#include <algorithm>
#include <vector>

#include "pmac/bits.hpp"
#include "pmac/quire.hpp"
#include "reference_oracles.hpp"

using namespace pmac;

namespace {

DecodedPosit dec(uint32_t bits, PositFormat fmt) { return decode(PositWord{bits, fmt}); }

Dyadic quire_value(const Quire& q)
{
    BigInt acc = BigInt::from_twos_complement(q.limbs().data(), q.width());
    return Dyadic(acc, -2 * q.format().sf_max());
}

uint32_t random_pattern(PositFormat fmt, SplitMix& rng)
{
    for (;;) {
        uint32_t bits = static_cast<uint32_t>(rng.next()) & fmt.word_mask();
        if (bits != fmt.nar_pattern()) return bits;
    }
}

}  // namespace

TEST_CASE("quire zero state and widths")
{
    Quire q8 = Quire::zero(PositFormat::p8);
    CHECK(q8.is_zero_value());
    CHECK(q8.width() == 32);
    CHECK(q8.to_posit().bits == 0x00);
    CHECK(q8.hex() == "00000000");
    CHECK(Quire::zero(PositFormat::p32).width() == 512);
}

TEST_CASE("bypass leaves the quire untouched")
{
    PositFormat fmt = PositFormat::p8;
    Quire q = Quire::zero(fmt);
    q.add_product(dec(0x60, fmt), dec(0x68, fmt), false);
    CHECK(q == Quire::zero(fmt));
    q.add_product(dec(0x80, fmt), dec(0x40, fmt), false);  // NaR under bypass
    CHECK(!q.is_nar());
}

TEST_CASE("2.0 * 3.0 accumulates exactly 6")
{
    Quire q = Quire::zero(PositFormat::p8);
    q.add_product(dec(0x60, PositFormat::p8), dec(0x68, PositFormat::p8), true);
    CHECK(quire_value(q) == Dyadic::from_int(6));
    CHECK(q.limbs()[0] == uint64_t{6} << 12);  // binary point at 2*sf_max
    CHECK(q.to_posit().bits == 0x74);
}

TEST_CASE("NaR operand poisons")
{
    Quire q = Quire::zero(PositFormat::p8);
    q.add_product(dec(0x80, PositFormat::p8), dec(0x40, PositFormat::p8), true);
    CHECK(q.is_nar());
    CHECK(q.to_posit().bits == 0x80);
}

TEST_CASE("16 accumulations of 0.5 * 1.0 hold exactly 8")
{
    Quire q = Quire::zero(PositFormat::p8);
    for (int i = 0; i < 16; ++i)
        q.add_product(dec(0x20, PositFormat::p8), dec(0x40, PositFormat::p8), true);
    CHECK(quire_value(q) == Dyadic::from_int(8));
    CHECK(q.to_posit().bits == 0x78);  // 8.0
}

TEST_CASE("readback of exact values")
{
    Quire q = Quire::zero(PositFormat::p8);
    q.add_product(dec(0x40, PositFormat::p8), dec(0x40, PositFormat::p8), true);
    CHECK(q.to_posit().bits == 0x40);

    // 2.5 * 2.5 = 6.25, RNE tie to 6.0.
    Quire t = Quire::zero(PositFormat::p8);
    t.add_product(dec(0x64, PositFormat::p8), dec(0x64, PositFormat::p8), true);
    CHECK(t.to_posit().bits == 0x74);
}

TEST_CASE("exactness against the arbitrary-precision oracle")
{
    SplitMix rng(0xACC0);
    for (PositFormat fmt : {PositFormat::p8, PositFormat::p16, PositFormat::p32}) {
        for (int trial = 0; trial < 60; ++trial) {
            int count = static_cast<int>(rng.below(200));
            Quire q = Quire::zero(fmt);
            Dyadic sum;
            for (int i = 0; i < count; ++i) {
                uint32_t a = random_pattern(fmt, rng);
                uint32_t b = random_pattern(fmt, rng);
                q.add_product(dec(a, fmt), dec(b, fmt), true);
                if (a && b)
                    sum = sum + to_real(PositWord{a, fmt}).mul_small(to_real(PositWord{b, fmt}));
            }
            REQUIRE(!q.wrapped());
            REQUIRE(quire_value(q) == sum);
        }
    }
}

TEST_CASE("permutation invariance")
{
    SplitMix rng(0x9E21);
    PositFormat fmt = PositFormat::p16;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::pair<uint32_t, uint32_t>> pairs;
        int count = 1 + static_cast<int>(rng.below(100));
        for (int i = 0; i < count; ++i)
            pairs.emplace_back(random_pattern(fmt, rng), random_pattern(fmt, rng));

        Quire q1 = Quire::zero(fmt);
        for (auto [a, b] : pairs) q1.add_product(dec(a, fmt), dec(b, fmt), true);

        // Fisher-Yates with the campaign generator.
        for (size_t i = pairs.size(); i > 1; --i)
            std::swap(pairs[i - 1], pairs[rng.below(i)]);
        Quire q2 = Quire::zero(fmt);
        for (auto [a, b] : pairs) q2.add_product(dec(a, fmt), dec(b, fmt), true);

        REQUIRE(q1 == q2);
        REQUIRE(q1.to_posit() == q2.to_posit());
    }
}

TEST_CASE("sign correctness: (a,b) plus (-a,b) cancels exactly")
{
    SplitMix rng(0x516E);
    PositFormat fmt = PositFormat::p16;
    for (int trial = 0; trial < 2000; ++trial) {
        uint32_t a = random_pattern(fmt, rng);
        if (a == 0) continue;
        uint32_t b = random_pattern(fmt, rng);
        Quire q = Quire::zero(fmt);
        q.add_product(dec(a, fmt), dec(b, fmt), true);
        q.add_product(dec(twos_complement(a, fmt), fmt), dec(b, fmt), true);
        REQUIRE(q.is_zero_value());
    }
}

TEST_CASE("multiply by one through the quire is lossless (exhaustive p8)")
{
    PositFormat fmt = PositFormat::p8;
    DecodedPosit one = dec(0x40, fmt);
    for (uint32_t bits = 0; bits <= 0xFF; ++bits) {
        Quire q = Quire::zero(fmt);
        q.add_product(dec(bits, fmt), one, true);
        REQUIRE(q.to_posit().bits == bits);
    }
}

TEST_CASE("capacity bound and wrap detection")
{
    PositFormat fmt = PositFormat::p8;
    DecodedPosit maxp = dec(0x7F, fmt);
    DecodedPosit minp_neg = dec(twos_complement(0x7F, fmt), fmt);

    // 2^(n-1) - 1 maximal positive products stay exact.
    Quire q = Quire::zero(fmt);
    for (int i = 0; i < 127; ++i) q.add_product(maxp, maxp, true);
    CHECK(!q.wrapped());
    CHECK(quire_value(q) == Dyadic(BigInt(127L << 12), 0));

    // The 2^(n-1)-th positive one wraps the register (and is flagged);
    // the negative edge fits exactly at 2^(n-1) products.
    q.add_product(maxp, maxp, true);
    CHECK(q.wrapped());

    Quire neg = Quire::zero(fmt);
    for (int i = 0; i < 128; ++i) neg.add_product(minp_neg, maxp, true);
    CHECK(!neg.wrapped());
    CHECK(quire_value(neg) == Dyadic(BigInt(-(128L << 12)), 0));
}

TEST_CASE("quire hex dump")
{
    Quire q = Quire::zero(PositFormat::p8);
    q.add_product(dec(0x60, PositFormat::p8), dec(0x68, PositFormat::p8), true);
    CHECK(q.hex() == "00006000");

    Quire neg = Quire::zero(PositFormat::p8);
    neg.add_product(dec(twos_complement(0x40, PositFormat::p8), PositFormat::p8),
                    dec(0x40, PositFormat::p8), true);
    CHECK(neg.hex() == "fffff000");  // -1.0 * 2^12 in two's complement
}

TEST_CASE("quire readout agrees with the enumeration oracle on random sums")
{
    SplitMix rng(0xFACE);
    for (PositFormat fmt : {PositFormat::p8, PositFormat::p16}) {
        for (int trial = 0; trial < 400; ++trial) {
            int count = 1 + static_cast<int>(rng.below(24));
            Quire q = Quire::zero(fmt);
            Dyadic sum;
            for (int i = 0; i < count; ++i) {
                uint32_t a = random_pattern(fmt, rng);
                uint32_t b = random_pattern(fmt, rng);
                q.add_product(dec(a, fmt), dec(b, fmt), true);
                if (a && b)
                    sum = sum + to_real(PositWord{a, fmt}).mul_small(to_real(PositWord{b, fmt}));
            }
            REQUIRE(q.to_posit().bits == refo::enumerate_nearest(sum, fmt));
        }
    }
}
