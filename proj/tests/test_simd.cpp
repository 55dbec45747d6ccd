#include <doctest.h>

#include <stdexcept>

#include "pmac/bits.hpp"
#include "pmac/simd.hpp"

using namespace pmac;

namespace {

constexpr Mode kModes[] = {Mode::P8, Mode::P16, Mode::P32};

// Scalar per-lane oracles.
uint32_t scalar_negate(uint32_t v, int width) { return (~v + 1) & mask_bits(width); }

int scalar_lod_from_msb(uint32_t v, int width)
{
    for (int i = 0; i < width; ++i)
        if ((v >> (width - 1 - i)) & 1) return i;
    return -1;
}

uint32_t scalar_shift(uint32_t v, int amount, ShiftDir dir, int width)
{
    if (dir == ShiftDir::Left) return (v << amount) & mask_bits(width);
    uint32_t sign = (v >> (width - 1)) & 1;
    uint32_t r = v >> amount;
    if (sign && amount) r |= mask_bits(amount) << (width - amount);
    return r;
}

uint32_t rand_lane(SplitMix& rng, int width) { return static_cast<uint32_t>(rng.next()) & mask_bits(width); }

}  // namespace

TEST_CASE("mode codes and lane geometry")
{
    CHECK(mode_from_code(0) == Mode::P8);
    CHECK(mode_from_code(2) == Mode::P32);
    CHECK_THROWS_AS(mode_from_code(3), std::invalid_argument);
    CHECK(lanes(Mode::P8) == 4);
    CHECK(lanes(Mode::P16) == 2);
    CHECK(lanes(Mode::P32) == 1);
    CHECK(lane_width(Mode::P16) == 16);
}

TEST_CASE("lane get/set round trips")
{
    SplitMix rng(0x1A5E);
    for (Mode m : kModes) {
        for (int i = 0; i < 1000; ++i) {
            SimdWord w{static_cast<uint32_t>(rng.next())};
            int lane = static_cast<int>(rng.below(static_cast<uint64_t>(lanes(m))));
            uint32_t v = rand_lane(rng, lane_width(m));
            SimdWord w2 = set_lane(w, lane, m, v);
            REQUIRE(get_lane(w2, lane, m) == v);
            for (int other = 0; other < lanes(m); ++other) {
                if (other != lane) REQUIRE(get_lane(w2, other, m) == get_lane(w, other, m));
            }
        }
    }
}

TEST_CASE("complement spec examples")
{
    CHECK(simd_complement(SimdWord{0}, 0xF, Mode::P8).bits == 0);
    CHECK(simd_complement(SimdWord{0x01020304}, 0xF, Mode::P8).bits == 0xFFFEFDFC);
    CHECK(simd_complement(SimdWord{0x00000001}, 0x1, Mode::P32).bits == 0xFFFFFFFF);
}

TEST_CASE("complement carry never crosses a lane boundary")
{
    // In p8 mode every lane holding 0xFF negates to 0x01 with no ripple out.
    CHECK(simd_complement(SimdWord{0xFFFFFFFF}, 0xF, Mode::P8).bits == 0x01010101);
    // Same word in p32 mode ripples the full width.
    CHECK(simd_complement(SimdWord{0xFFFFFFFF}, 0x1, Mode::P32).bits == 0x00000001);
}

TEST_CASE("lod spec examples")
{
    auto r = simd_lod(SimdWord{0x00100000}, Mode::P8);
    CHECK(!r[0].valid);
    CHECK(!r[1].valid);
    CHECK(r[2].valid);
    CHECK(r[2].position == 3);  // lane value 0b00010000
    CHECK(!r[3].valid);

    auto r32 = simd_lod(SimdWord{0x00000001}, Mode::P32);
    CHECK(r32[0].valid);
    CHECK(r32[0].position == 31);
}

TEST_CASE("shift spec examples")
{
    CHECK(simd_shift(SimdWord{0xDEADBEEF}, {0, 0, 0, 0}, ShiftDir::Left, Mode::P8).bits == 0xDEADBEEF);
    // Arithmetic right replicates the lane's own sign bit.
    CHECK(simd_shift(SimdWord{0x00000080}, {2, 0, 0, 0}, ShiftDir::RightArith, Mode::P8).bits == 0x000000E0);
    // P16 left by one: MSB falls off lane 1, nothing leaks into lane 0.
    CHECK(simd_shift(SimdWord{0x80000001}, {1, 1, 0, 0}, ShiftDir::Left, Mode::P16).bits == 0x00000002);
    CHECK_THROWS_AS(simd_shift(SimdWord{0}, {8, 0, 0, 0}, ShiftDir::Left, Mode::P8), std::out_of_range);
}

TEST_CASE("blocks match scalar oracles lane by lane with isolation")
{
    SplitMix rng(0x150D);
    for (Mode m : kModes) {
        const int lw = lane_width(m);
        for (int i = 0; i < 100000; ++i) {
            SimdWord x{static_cast<uint32_t>(rng.next())};
            SimdWord y{static_cast<uint32_t>(rng.next())};
            LaneMask neg = static_cast<LaneMask>(rng.below(all_lanes_mask(m) + 1u));
            std::array<int, 4> amounts{};
            for (auto& a : amounts) a = static_cast<int>(rng.below(static_cast<uint64_t>(lw)));
            ShiftDir dir = rng.chance(1, 2) ? ShiftDir::Left : ShiftDir::RightArith;

            SimdWord comp = simd_complement(x, neg, m);
            auto lod = simd_lod(x, m);
            SimdWord shifted = simd_shift(x, amounts, dir, m);
            LaneProducts prods = simd_multiply(x, y, m);

            // Perturbation word: change every other lane, keep the probe lane.
            int probe = static_cast<int>(rng.below(static_cast<uint64_t>(lanes(m))));
            SimdWord px = x, py = y;
            for (int lane = 0; lane < lanes(m); ++lane) {
                if (lane == probe) continue;
                px = set_lane(px, lane, m, rand_lane(rng, lw));
                py = set_lane(py, lane, m, rand_lane(rng, lw));
            }

            for (int lane = 0; lane < lanes(m); ++lane) {
                uint32_t xl = get_lane(x, lane, m);
                REQUIRE(get_lane(comp, lane, m) ==
                        (((neg >> lane) & 1) ? scalar_negate(xl, lw) : xl));
                int pos = scalar_lod_from_msb(xl, lw);
                REQUIRE(lod[lane].valid == (pos >= 0));
                if (pos >= 0) REQUIRE(lod[lane].position == pos);
                REQUIRE(get_lane(shifted, lane, m) == scalar_shift(xl, amounts[lane], dir, lw));
                uint64_t expect = static_cast<uint64_t>(xl) * get_lane(y, lane, m);
                REQUIRE(prods.prod[lane] == expect);
            }

            // Lane isolation: probe lane output is identical under the
            // perturbed inputs.
            REQUIRE(get_lane(simd_complement(px, neg, m), probe, m) == get_lane(comp, probe, m));
            REQUIRE(simd_lod(px, m)[probe].position == lod[probe].position);
            REQUIRE(simd_lod(px, m)[probe].valid == lod[probe].valid);
            REQUIRE(get_lane(simd_shift(px, amounts, dir, m), probe, m) ==
                    get_lane(shifted, probe, m));
            REQUIRE(simd_multiply(px, py, m).prod[probe] == prods.prod[probe]);
        }
    }
}

TEST_CASE("multiplier spec examples and aggregation equivalence")
{
    // b = 1 is the identity.
    SimdWord ones{0x01010101};
    SimdWord a{0xFEDCBA98};
    auto id = simd_multiply(a, ones, Mode::P8);
    for (int lane = 0; lane < 4; ++lane) REQUIRE(id.prod[lane] == get_lane(a, lane, Mode::P8));

    auto maxed = simd_multiply(SimdWord{0xFFFFFFFF}, SimdWord{0xFFFFFFFF}, Mode::P8);
    for (int lane = 0; lane < 4; ++lane) REQUIRE(maxed.prod[lane] == 0xFE01);

    auto cross = simd_multiply(SimdWord{0x00010001}, SimdWord{0x00010001}, Mode::P32);
    REQUIRE(cross.prod[0] == 0x0000000100020001ull);

    // Exhaustive 8x8 against the widening multiply.
    for (uint32_t x = 0; x <= 0xFF; ++x)
        for (uint32_t y = 0; y <= 0xFF; ++y)
            REQUIRE(simd_multiply(SimdWord{x}, SimdWord{y}, Mode::P8).prod[0] == x * y);
}

TEST_CASE("staged shifter equals direct shift for all amounts")
{
    SplitMix rng(0x5417);
    for (Mode m : kModes) {
        const int lw = lane_width(m);
        for (int i = 0; i < 10000; ++i) {
            SimdWord x{static_cast<uint32_t>(rng.next())};
            for (int amount = 0; amount < lw; ++amount) {
                std::array<int, 4> amounts{amount, amount, amount, amount};
                for (ShiftDir dir : {ShiftDir::Left, ShiftDir::RightArith}) {
                    SimdWord got = simd_shift(x, amounts, dir, m);
                    for (int lane = 0; lane < lanes(m); ++lane)
                        REQUIRE(get_lane(got, lane, m) ==
                                scalar_shift(get_lane(x, lane, m), amount, dir, lw));
                }
            }
        }
    }
}
