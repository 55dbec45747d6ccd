#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

#include "pmac/posit.hpp"

namespace pmac {

// 2-bit precision selector: 00 = four 8-bit lanes, 01 = two 16-bit lanes,
// 10 = one 32-bit lane. Code 11 is reserved and rejected.
enum class Mode : uint8_t
{
    P8 = 0,
    P16 = 1,
    P32 = 2,
};

Mode mode_from_code(unsigned code);  // throws std::invalid_argument on 11
std::optional<Mode> mode_parse(std::string_view name);
std::string_view mode_name(Mode m);

constexpr int lanes(Mode m) { return m == Mode::P8 ? 4 : m == Mode::P16 ? 2 : 1; }
constexpr int lane_width(Mode m) { return 32 / lanes(m); }
PositFormat lane_format(Mode m);

// 32-bit packed lane container; lane 0 occupies the least significant bits.
struct SimdWord
{
    uint32_t bits = 0;
    bool operator==(const SimdWord&) const = default;
};

uint32_t get_lane(SimdWord w, int lane, Mode m);
SimdWord set_lane(SimdWord w, int lane, Mode m, uint32_t value);

// Per-lane boolean vectors (negate selects, lane enables) travel as a bit
// mask, bit k = lane k. Only the low lanes(mode) bits are meaningful.
using LaneMask = uint8_t;
constexpr LaneMask all_lanes_mask(Mode m) { return static_cast<LaneMask>((1u << lanes(m)) - 1); }

// Mode-aware two's complement: each selected lane negates independently,
// carry chains cut at lane boundaries.
SimdWord simd_complement(SimdWord x, LaneMask negate, Mode m);

// Leading-one detect per lane; position counts from the lane MSB (0 = MSB)
// so it feeds the regime/normalization left shift directly. valid = false
// for an all-zero lane.
struct LodResult
{
    int position = 0;
    bool valid = false;
};
std::array<LodResult, 4> simd_lod(SimdWord x, Mode m);

enum class ShiftDir
{
    Left,
    RightArith,  // replicates each lane's own sign bit
};

// Per-lane barrel shift composed from log2(lane_width) power-of-two stages;
// no bit crosses a lane boundary. Amounts must satisfy 0 <= amt < lane_width.
SimdWord simd_shift(SimdWord x, const std::array<int, 4>& amounts, ShiftDir dir, Mode m);

// Precision-partitioned unsigned multiply. Every product is aggregated from
// 8x8 -> 16 sub-products: four independent ones in P8 mode, two groups of
// four in P16 mode, one group of sixteen in P32 mode — the behavioral
// contract of a shared multiplier bank, without gate-level Booth detail.
struct LaneProducts
{
    std::array<uint64_t, 4> prod{};  // entries [0, lanes(mode)), width 2*lane_width
    int count = 0;
};
LaneProducts simd_multiply(SimdWord a, SimdWord b, Mode m);

}  // namespace pmac
