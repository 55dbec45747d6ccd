#include "pmac/simd.hpp"

#include <bit>
#include <stdexcept>

#include "pmac/bits.hpp"

namespace pmac {

Mode mode_from_code(unsigned code)
{
    if (code > 2) throw std::invalid_argument("mode code 11 is reserved");
    return static_cast<Mode>(code);
}

std::optional<Mode> mode_parse(std::string_view name)
{
    if (name == "p8") return Mode::P8;
    if (name == "p16") return Mode::P16;
    if (name == "p32") return Mode::P32;
    return std::nullopt;
}

std::string_view mode_name(Mode m)
{
    return m == Mode::P8 ? "p8" : m == Mode::P16 ? "p16" : "p32";
}

PositFormat lane_format(Mode m)
{
    return m == Mode::P8 ? PositFormat::p8 : m == Mode::P16 ? PositFormat::p16 : PositFormat::p32;
}

namespace {

void check_lane(int lane, Mode m)
{
    if (lane < 0 || lane >= lanes(m)) throw std::out_of_range("lane index");
}

}  // namespace

uint32_t get_lane(SimdWord w, int lane, Mode m)
{
    check_lane(lane, m);
    int lw = lane_width(m);
    return (w.bits >> (lane * lw)) & mask_bits(lw);
}

SimdWord set_lane(SimdWord w, int lane, Mode m, uint32_t value)
{
    check_lane(lane, m);
    int lw = lane_width(m);
    uint32_t mask = mask_bits(lw) << (lane * lw);
    return SimdWord{(w.bits & ~mask) | ((value << (lane * lw)) & mask)};
}

SimdWord simd_complement(SimdWord x, LaneMask negate, Mode m)
{
    SimdWord out = x;
    int lw = lane_width(m);
    for (int lane = 0; lane < lanes(m); ++lane) {
        if (!((negate >> lane) & 1)) continue;
        uint32_t v = get_lane(x, lane, m);
        out = set_lane(out, lane, m, (~v + 1) & mask_bits(lw));
    }
    return out;
}

std::array<LodResult, 4> simd_lod(SimdWord x, Mode m)
{
    std::array<LodResult, 4> out{};
    int lw = lane_width(m);
    for (int lane = 0; lane < lanes(m); ++lane) {
        uint32_t v = get_lane(x, lane, m);
        if (v == 0) continue;
        out[lane].valid = true;
        out[lane].position = lw - 1 - msb_index(v);
    }
    return out;
}

SimdWord simd_shift(SimdWord x, const std::array<int, 4>& amounts, ShiftDir dir, Mode m)
{
    int lw = lane_width(m);
    for (int lane = 0; lane < lanes(m); ++lane) {
        if (amounts[lane] < 0 || amounts[lane] >= lw)
            throw std::out_of_range("shift amount out of range");
    }

    SimdWord out = x;
    // Logarithmic barrel structure: one conditional power-of-two stage per
    // amount bit, applied lane-locally.
    for (int lane = 0; lane < lanes(m); ++lane) {
        uint32_t v = get_lane(x, lane, m);
        uint32_t sign_bit = (v >> (lw - 1)) & 1;
        for (int stage = 0; (1 << stage) < lw; ++stage) {
            if (!((amounts[lane] >> stage) & 1)) continue;
            int step = 1 << stage;
            if (dir == ShiftDir::Left) {
                v = (v << step) & mask_bits(lw);
            } else {
                uint32_t fill = sign_bit ? mask_bits(step) << (lw - step) : 0;
                v = (v >> step) | fill;
            }
        }
        out = set_lane(out, lane, m, v);
    }
    return out;
}

namespace {

// The one shared multiplier primitive; everything wider is composed.
inline uint32_t mul8x8(uint32_t a, uint32_t b)
{
    return (a & 0xFF) * (b & 0xFF);
}

uint64_t compose_product(uint32_t a, uint32_t b, int bytes)
{
    uint64_t acc = 0;
    for (int i = 0; i < bytes; ++i) {
        for (int j = 0; j < bytes; ++j) {
            uint64_t sub = mul8x8(a >> (8 * i), b >> (8 * j));
            acc += sub << (8 * (i + j));
        }
    }
    return acc;
}

}  // namespace

LaneProducts simd_multiply(SimdWord a, SimdWord b, Mode m)
{
    LaneProducts out;
    out.count = lanes(m);
    int bytes = lane_width(m) / 8;
    for (int lane = 0; lane < lanes(m); ++lane) {
        out.prod[lane] = compose_product(get_lane(a, lane, m), get_lane(b, lane, m), bytes);
    }
    return out;
}

}  // namespace pmac
