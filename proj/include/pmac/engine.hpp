#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "pmac/quire.hpp"
#include "pmac/simd.hpp"

namespace pmac {

// Per-issue record of every pipeline stage, for debugging and for diffing
// against HDL simulation logs. Stage data is kept for all lanes regardless
// of enables (the datapath computes; only accumulation is gated).
struct MacTrace
{
    Mode mode = Mode::P8;
    uint64_t issue_index = 0;
    SimdWord a, b;
    LaneMask enables = 0;

    struct LanePair
    {
        DecodedPosit a, b;
    };
    std::array<LanePair, 4> stage1{};       // unpacked operands
    std::array<uint64_t, 4> stage2{};       // mantissa products, 2*lane_width bits
    std::array<Quire, 4> stage3;            // quire state after accumulation
    struct Stage4
    {
        bool zero = true;
        bool sign = false;
        int sf = 0;
        uint32_t frac = 0;  // kept F-bit mantissa register
        bool guard = false, round = false, sticky = false;
    };
    std::array<Stage4, 4> stage4{};         // normalization + rounding inputs
    std::array<uint32_t, 4> stage5{};       // packed per-lane output patterns

    MacTrace() : stage3{Quire::zero(PositFormat::p8), Quire::zero(PositFormat::p8),
                        Quire::zero(PositFormat::p8), Quire::zero(PositFormat::p8)} {}
};

// Line-oriented serialization, one issue per record; field layout is
// documented in the README and kept stable for log diffing.
std::string format_trace(const MacTrace& t);

// Five-stage multi-precision MAC datapath: mode-controlled unpack,
// partitioned mantissa multiply, per-lane quire accumulation, and
// normalization/rounding on readout. One issue() call is one fully retired
// MAC per enabled lane; readout() is non-destructive so accumulation can
// continue across reads. Mode is fixed from construction to reset().
class MacEngine
{
public:
    explicit MacEngine(Mode mode);

    Mode mode() const { return mode_; }
    uint64_t issue_count() const { return issue_count_; }
    int active_lanes() const { return lanes(mode_); }
    const Quire& lane_quire(int lane) const { return quires_.at(lane); }

    // Unpacks both operand words through the SIMD complementor / LOD /
    // shifter, multiplies mantissas in the partitioned multiplier, and
    // accumulates into each enabled lane's quire. NaR poisons only its own
    // lane; disabled lanes are untouched.
    MacTrace issue(SimdWord a, SimdWord b, LaneMask enables);

    // Same accumulation without assembling the per-stage record; used by
    // bulk campaigns and inference where only the readout matters.
    void issue_quiet(SimdWord a, SimdWord b, LaneMask enables);

    SimdWord readout() const;

    // Clears the datapath for a new mode; issue_count is preserved.
    void reset(Mode mode);

    // Stage 1 as a standalone function: per-lane unpack via the SIMD
    // blocks. Bit-identical to scalar decode per lane (tested).
    static std::array<DecodedPosit, 4> unpack(SimdWord w, Mode mode);

private:
    void issue_core(SimdWord a, SimdWord b, LaneMask enables, MacTrace* t);

    Mode mode_;
    std::vector<Quire> quires_;
    uint64_t issue_count_ = 0;
};

// Single fused a*b+c per lane: quires seeded with c via an exact *1.0
// product, one all-enabled issue, then readout.
SimdWord mac_once(Mode mode, SimdWord a, SimdWord b, SimdWord c_init);

}  // namespace pmac
