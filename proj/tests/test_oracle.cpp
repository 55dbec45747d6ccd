#include <doctest.h>

#include <vector>

#include "pmac/bits.hpp"
#include "pmac/oracle.hpp"
#include "reference_oracles.hpp"

using namespace pmac;

namespace {
using Pair = std::pair<PositWord, PositWord>;
PositWord w8(uint32_t bits) { return PositWord{bits, PositFormat::p8}; }
}  // namespace

TEST_CASE("ref_mac spec examples")
{
    CHECK(ref_mac({}, PositFormat::p8).bits == 0x00);

    std::vector<Pair> six = {{w8(0x60), w8(0x68)}};
    CHECK(ref_mac(six, PositFormat::p8).bits == 0x74);

    std::vector<Pair> tie = {{w8(0x64), w8(0x64)}};
    CHECK(ref_mac(tie, PositFormat::p8).bits == 0x74);  // 6.25 ties to 6.0

    std::vector<Pair> nar = {{w8(0x80), w8(0x00)}};
    CHECK(ref_mac(nar, PositFormat::p8).bits == 0x80);
}

TEST_CASE("ref_mac multiply-by-one is the identity (exhaustive p8)")
{
    for (uint32_t bits = 0; bits <= 0xFF; ++bits) {
        std::vector<Pair> v = {{w8(bits), w8(0x40)}};
        REQUIRE(ref_mac(v, PositFormat::p8).bits == bits);
    }
}

TEST_CASE("nearest_posit equals the enumeration oracle")
{
    SplitMix rng(0x0AC1E);
    for (PositFormat fmt : {PositFormat::p8, PositFormat::p16}) {
        for (int i = 0; i < 20000; ++i) {
            // Random dyadic probes with odd mantissas up to 16 bits.
            uint64_t m = (rng.next() & 0xFFFF) | 1;
            int64_t q = rng.range(-2 * fmt.sf_max() - 8, fmt.sf_max() + 4);
            Dyadic v(BigInt::from_u64(m), q);
            if (rng.chance(1, 2)) v = -v;
            REQUIRE(nearest_posit(v, fmt).bits == refo::enumerate_nearest(v, fmt));
        }
    }
}

TEST_CASE("nearest_posit saturation and boundary behavior")
{
    PositFormat fmt = PositFormat::p8;
    CHECK(nearest_posit(Dyadic::from_int(1 << 20), fmt).bits == 0x7F);
    CHECK(nearest_posit(-Dyadic::from_int(1 << 20), fmt).bits == 0x81);
    // Half of minpos = 2^-7: tie between zero (even) and minpos (odd).
    CHECK(nearest_posit(Dyadic(BigInt(1), -7), fmt).bits == 0x00);
    CHECK(nearest_posit(Dyadic(BigInt(5), -9), fmt).bits == 0x01);  // just above half minpos
    CHECK(nearest_posit(Dyadic(BigInt(1), -9), fmt).bits == 0x00);  // quarter of minpos
    CHECK(nearest_posit(Dyadic(), fmt).bits == 0x00);
}

TEST_CASE("ref accumulator matches batch ref_mac")
{
    SplitMix rng(0xACDC);
    PositFormat fmt = PositFormat::p16;
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Pair> pairs;
        int count = static_cast<int>(rng.below(24));
        RefAccumulator acc(fmt);
        for (int i = 0; i < count; ++i) {
            uint32_t a = static_cast<uint32_t>(rng.next()) & fmt.word_mask();
            uint32_t b = static_cast<uint32_t>(rng.next()) & fmt.word_mask();
            pairs.push_back({PositWord{a, fmt}, PositWord{b, fmt}});
            acc.add(PositWord{a, fmt}, PositWord{b, fmt});
        }
        REQUIRE(ref_mac(pairs, fmt).bits == acc.read().bits);
    }
}
