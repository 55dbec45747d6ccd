#pragma once

#include <span>
#include <utility>

#include "pmac/exact.hpp"
#include "pmac/posit.hpp"

namespace pmac {

// Golden reference for the MAC datapath: straight-line exact arithmetic,
// deliberately sharing nothing with the quire/engine path beyond decode and
// to_real so differential tests compare two independent algorithms.

// Nearest representable posit to an exact value, ties to the pattern with
// even last bit. Implemented as a bracketing search over the value-ordered
// pattern space, not guard-bit mechanics. Values beyond maxpos land on
// maxpos; the nearest pattern to anything at or below half of minpos is
// zero (the half-minpos tie is decided by pattern parity like every other
// tie: zero is even, minpos odd).
PositWord nearest_posit(const Dyadic& value, PositFormat fmt);

// Exact rational sum of products, rounded once. NaR in any operand is NaR
// out; the empty sum is zero.
PositWord ref_mac(std::span<const std::pair<PositWord, PositWord>> pairs, PositFormat fmt);

// Incremental form for long differential campaigns: accumulate exact
// products, read the rounded value at any point.
class RefAccumulator
{
public:
    explicit RefAccumulator(PositFormat fmt) : fmt_(fmt) {}

    void add(PositWord a, PositWord b);
    PositWord read() const;
    const Dyadic& exact_sum() const { return sum_; }
    bool is_nar() const { return nar_; }

private:
    PositFormat fmt_;
    Dyadic sum_;
    bool nar_ = false;
};

}  // namespace pmac
