#include "pmac/oracle.hpp"

namespace pmac {

PositWord nearest_posit(const Dyadic& value, PositFormat fmt)
{
    if (value.is_zero()) return PositWord{0, fmt};
    bool sign = value.signum() < 0;
    Dyadic mag = value.abs();

    // Largest pattern in [0, maxpos] whose value does not exceed |v|;
    // patterns on the non-negative side are value-ordered.
    uint32_t lo = 0;
    uint32_t hi = fmt.maxpos_pattern();
    while (lo < hi) {
        uint32_t mid = lo + (hi - lo + 1) / 2;
        if (to_real(PositWord{mid, fmt}).compare(mag) <= 0)
            lo = mid;
        else
            hi = mid - 1;
    }

    uint32_t pick;
    if (lo == fmt.maxpos_pattern()) {
        pick = lo;
    } else {
        Dyadic d_lo = mag - to_real(PositWord{lo, fmt});
        Dyadic d_hi = to_real(PositWord{lo + 1, fmt}) - mag;
        int c = d_lo.compare(d_hi);
        if (c < 0)
            pick = lo;
        else if (c > 0)
            pick = lo + 1;
        else
            pick = (lo & 1) ? lo + 1 : lo;  // tie: even last bit
    }

    uint32_t bits = (sign && pick) ? twos_complement(pick, fmt) : pick;
    return PositWord{bits, fmt};
}

void RefAccumulator::add(PositWord a, PositWord b)
{
    if (a.is_nar() || b.is_nar()) {
        nar_ = true;
        return;
    }
    if (a.is_zero() || b.is_zero()) return;
    sum_ = sum_ + to_real(a).mul_small(to_real(b));
}

PositWord RefAccumulator::read() const
{
    if (nar_) return PositWord{fmt_.nar_pattern(), fmt_};
    return nearest_posit(sum_, fmt_);
}

PositWord ref_mac(std::span<const std::pair<PositWord, PositWord>> pairs, PositFormat fmt)
{
    RefAccumulator acc(fmt);
    for (const auto& [a, b] : pairs) acc.add(a, b);
    return acc.read();
}

}  // namespace pmac
