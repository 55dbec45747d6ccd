#include "pmac/engine.hpp"

#include <cassert>
#include <sstream>

#include "pmac/bits.hpp"

namespace pmac {

MacEngine::MacEngine(Mode mode) : mode_(mode)
{
    quires_.assign(lanes(mode_), Quire::zero(lane_format(mode_)));
}

void MacEngine::reset(Mode mode)
{
    mode_ = mode;
    quires_.assign(lanes(mode_), Quire::zero(lane_format(mode_)));
}

std::array<DecodedPosit, 4> MacEngine::unpack(SimdWord w, Mode mode)
{
    const int lw = lane_width(mode);
    const int nb = lw - 1;
    const PositFormat fmt = lane_format(mode);
    std::array<DecodedPosit, 4> out{};

    LaneMask neg = 0;
    for (int lane = 0; lane < lanes(mode); ++lane) {
        uint32_t v = get_lane(w, lane, mode);
        if (v == 0) {
            out[lane].cls = PositClass::Zero;
        } else if (v == fmt.nar_pattern()) {
            out[lane].cls = PositClass::NaR;
        } else {
            out[lane].cls = PositClass::Normal;
            out[lane].sign = (v >> nb) & 1;
            if (out[lane].sign) neg |= LaneMask{1} << lane;
        }
    }

    // Sign removal, then regime decode: invert the ones-run lanes so the
    // LOD sees the regime terminator as the leading one. The zero shifted
    // in below the body bounds an untermimated run at exactly nb.
    SimdWord mag = simd_complement(w, neg, mode);
    SimdWord body = simd_shift(mag, {1, 1, 1, 1}, ShiftDir::Left, mode);
    uint32_t invert = 0;
    for (int lane = 0; lane < lanes(mode); ++lane) {
        if ((get_lane(body, lane, mode) >> nb) & 1)
            invert |= mask_bits(lw) << (lane * lw);
    }
    auto lod = simd_lod(SimdWord{body.bits ^ invert}, mode);

    std::array<int, 4> align{};
    std::array<int, 4> run{};
    for (int lane = 0; lane < lanes(mode); ++lane) {
        if (out[lane].cls != PositClass::Normal) continue;
        assert(lod[lane].valid);
        run[lane] = lod[lane].position;
        // Shift past run + terminator when exponent/fraction bits remain.
        align[lane] = (nb - run[lane] - 1) > 0 ? run[lane] + 1 : 0;
    }
    SimdWord aligned = simd_shift(body, align, ShiftDir::Left, mode);

    for (int lane = 0; lane < lanes(mode); ++lane) {
        DecodedPosit& d = out[lane];
        if (d.cls != PositClass::Normal) continue;
        bool ones_run = (get_lane(body, lane, mode) >> nb) & 1;
        d.k = ones_run ? run[lane] - 1 : -run[lane];
        int rem = nb - run[lane] - 1;
        uint32_t af = rem > 0 ? get_lane(aligned, lane, mode) : 0;
        d.e = fmt.es() ? af >> (lw - fmt.es()) : 0;
        d.sf = (d.k << fmt.es()) + static_cast<int>(d.e);
        uint32_t frac_field = (af << fmt.es()) & mask_bits(lw);
        d.frac = (uint32_t{1} << (fmt.frac_width() - 1)) | (frac_field >> 2);
    }
    return out;
}

namespace {

MacTrace::Stage4 stage4_fields(const Quire& q)
{
    MacTrace::Stage4 s;
    Quire::Normalized n = q.normalize();
    if (n.zero || n.nar) return s;
    const int fw = q.format().frac_width();
    s.zero = false;
    s.sign = n.sign;
    s.sf = n.sf;
    s.frac = static_cast<uint32_t>(n.frac64 >> (64 - fw));
    // Guard/round/sticky below the F-bit mantissa register.
    s.guard = (n.frac64 >> (63 - fw)) & 1;
    s.round = (n.frac64 >> (62 - fw)) & 1;
    s.sticky = (n.frac64 & mask_bits64(62 - fw)) != 0 || n.sticky;
    return s;
}

}  // namespace

MacTrace MacEngine::issue(SimdWord a, SimdWord b, LaneMask enables)
{
    MacTrace t;
    t.mode = mode_;
    t.issue_index = issue_count_;
    t.a = a;
    t.b = b;
    t.enables = enables & all_lanes_mask(mode_);
    issue_core(a, b, t.enables, &t);
    return t;
}

void MacEngine::issue_quiet(SimdWord a, SimdWord b, LaneMask enables)
{
    issue_core(a, b, enables & all_lanes_mask(mode_), nullptr);
}

void MacEngine::issue_core(SimdWord a, SimdWord b, LaneMask enables, MacTrace* t)
{
    auto da = unpack(a, mode_);
    auto db = unpack(b, mode_);

    // Stage 2: partitioned multiply of the hidden-bit mantissas. Non-normal
    // lanes carry a zero mantissa through the multiplier.
    SimdWord ma, mb;
    for (int lane = 0; lane < lanes(mode_); ++lane) {
        ma = set_lane(ma, lane, mode_, da[lane].cls == PositClass::Normal ? da[lane].frac : 0);
        mb = set_lane(mb, lane, mode_, db[lane].cls == PositClass::Normal ? db[lane].frac : 0);
    }
    LaneProducts prod = simd_multiply(ma, mb, mode_);

    // Stage 3: gated quire accumulation; NaR poisons only its lane.
    for (int lane = 0; lane < lanes(mode_); ++lane) {
        bool en = (enables >> lane) & 1;
        if (en) {
            if (da[lane].cls == PositClass::NaR || db[lane].cls == PositClass::NaR) {
                quires_[lane].poison();
            } else {
                quires_[lane].add_scaled_product(da[lane].sign != db[lane].sign,
                                                 prod.prod[lane],
                                                 da[lane].sf + db[lane].sf, true);
            }
        }
        if (t) {
            t->stage1[lane] = {da[lane], db[lane]};
            t->stage2[lane] = prod.prod[lane];
            t->stage3[lane] = quires_[lane];
            t->stage4[lane] = stage4_fields(quires_[lane]);
            t->stage5[lane] = quires_[lane].to_posit().bits;
        }
    }
    ++issue_count_;
}

SimdWord MacEngine::readout() const
{
    SimdWord out;
    for (int lane = 0; lane < lanes(mode_); ++lane) {
        out = set_lane(out, lane, mode_, quires_[lane].to_posit().bits);
    }
    return out;
}

SimdWord mac_once(Mode mode, SimdWord a, SimdWord b, SimdWord c_init)
{
    MacEngine e(mode);
    const PositFormat fmt = lane_format(mode);
    // Seed the quires with c via an exact c*1.0 product insert.
    SimdWord one_word;
    for (int lane = 0; lane < lanes(mode); ++lane)
        one_word = set_lane(one_word, lane, mode, fmt.one_pattern());
    e.issue(c_init, one_word, all_lanes_mask(mode));
    e.issue(a, b, all_lanes_mask(mode));
    return e.readout();
}

namespace {

void hex_field(std::ostringstream& os, uint64_t v, int digits)
{
    static const char* hexd = "0123456789abcdef";
    std::string s(digits, '0');
    for (int i = digits; i-- > 0;) {
        s[i] = hexd[v & 0xF];
        v >>= 4;
    }
    os << s;
}

uint64_t pack_decoded(const DecodedPosit& d)
{
    uint64_t v = static_cast<uint64_t>(d.cls) << 62;
    if (d.sign) v |= uint64_t{1} << 61;
    v |= (static_cast<uint64_t>(static_cast<uint16_t>(static_cast<int16_t>(d.sf)))) << 32;
    v |= d.frac;
    return v;
}

uint64_t pack_stage4(const MacTrace::Stage4& s)
{
    uint64_t v = 0;
    if (s.zero) v |= uint64_t{1} << 63;
    if (s.sign) v |= uint64_t{1} << 62;
    if (s.guard) v |= uint64_t{1} << 50;
    if (s.round) v |= uint64_t{1} << 49;
    if (s.sticky) v |= uint64_t{1} << 48;
    v |= (static_cast<uint64_t>(static_cast<uint16_t>(static_cast<int16_t>(s.sf)))) << 32;
    v |= s.frac;
    return v;
}

}  // namespace

std::string format_trace(const MacTrace& t)
{
    std::ostringstream os;
    const int nlanes = lanes(t.mode);
    const PositFormat fmt = lane_format(t.mode);

    os << "issue=" << t.issue_index << " mode=" << mode_name(t.mode) << " a=";
    hex_field(os, t.a.bits, 8);
    os << " b=";
    hex_field(os, t.b.bits, 8);
    os << " en=";
    hex_field(os, t.enables, 1);
    os << "\n";

    for (int lane = 0; lane < nlanes; ++lane) {
        os << "stage1.lane" << lane << ".a=";
        hex_field(os, pack_decoded(t.stage1[lane].a), 16);
        os << "\n";
        os << "stage1.lane" << lane << ".b=";
        hex_field(os, pack_decoded(t.stage1[lane].b), 16);
        os << "\n";
    }
    for (int lane = 0; lane < nlanes; ++lane) {
        os << "stage2.lane" << lane << "=";
        hex_field(os, t.stage2[lane], lane_width(t.mode) / 2);
        os << "\n";
    }
    for (int lane = 0; lane < nlanes; ++lane) {
        os << "stage3.lane" << lane << "=" << t.stage3[lane].hex() << "\n";
    }
    for (int lane = 0; lane < nlanes; ++lane) {
        os << "stage4.lane" << lane << "=";
        hex_field(os, pack_stage4(t.stage4[lane]), 16);
        os << "\n";
    }
    for (int lane = 0; lane < nlanes; ++lane) {
        os << "stage5.lane" << lane << "=";
        hex_field(os, t.stage5[lane], fmt.hex_digits());
        os << "\n";
    }
    return os.str();
}

}  // namespace pmac
