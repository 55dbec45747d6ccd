#pragma once

// Test-only reference implementations, deliberately written as different
// algorithms from the library: a bit-vector field-walk decoder, and a
// nearest-ties-to-even search over enumerated value tables. The library is
// checked against these, never the other way around.

#include <algorithm>
#include <cstdint>
#include <vector>

#include "pmac/exact.hpp"
#include "pmac/posit.hpp"

namespace refo {

struct RefDecoded
{
    bool zero = false, nar = false;
    bool sign = false;
    int k = 0;
    unsigned e = 0;
    std::vector<int> frac_bits;  // after the hidden one, MSB first
    pmac::Dyadic value;
};

// Grade-school decoder: materialize the bit string, two's-complement by
// scanning, walk the regime run, read fields positionally.
inline RefDecoded ref_decode(uint32_t bits, int n, int es)
{
    RefDecoded r;
    std::vector<int> v(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<size_t>(i)] = (bits >> (n - 1 - i)) & 1;

    bool any = std::any_of(v.begin(), v.end(), [](int b) { return b != 0; });
    if (!any) {
        r.zero = true;
        return r;
    }
    if (v[0] == 1 && !std::any_of(v.begin() + 1, v.end(), [](int b) { return b != 0; })) {
        r.nar = true;
        return r;
    }

    r.sign = v[0] == 1;
    if (r.sign) {
        // two's complement: invert then add one, right to left
        for (auto& b : v) b ^= 1;
        for (int i = n - 1; i >= 0; --i) {
            if (v[static_cast<size_t>(i)] == 0) {
                v[static_cast<size_t>(i)] = 1;
                break;
            }
            v[static_cast<size_t>(i)] = 0;
        }
    }

    int idx = 1;
    int first = v[static_cast<size_t>(idx)];
    int run = 0;
    while (idx < n && v[static_cast<size_t>(idx)] == first) {
        ++run;
        ++idx;
    }
    if (idx < n) ++idx;  // skip terminator
    r.k = first == 1 ? run - 1 : -run;

    r.e = 0;
    for (int i = 0; i < es; ++i) {
        int bit = idx < n ? v[static_cast<size_t>(idx++)] : 0;
        r.e = (r.e << 1) | static_cast<unsigned>(bit);
    }
    while (idx < n) r.frac_bits.push_back(v[static_cast<size_t>(idx++)]);

    // value = (-1)^s * 2^(k*2^es+e) * 1.f
    int sf = (r.k << es) + static_cast<int>(r.e);
    int64_t mant = 1;
    for (int b : r.frac_bits) mant = (mant << 1) | b;
    if (r.sign) mant = -mant;
    r.value = pmac::Dyadic(pmac::BigInt(mant), sf - static_cast<int>(r.frac_bits.size()));
    return r;
}

// Value table of every non-NaR pattern, sorted by value.
struct ValueEntry
{
    uint32_t pattern;
    pmac::Dyadic value;
};

inline const std::vector<ValueEntry>& value_table(pmac::PositFormat fmt)
{
    static std::vector<ValueEntry> tables[3];
    int slot = fmt.n() == 8 ? 0 : fmt.n() == 16 ? 1 : 2;
    auto& table = tables[slot];
    if (table.empty()) {
        uint64_t count = uint64_t{1} << fmt.n();
        for (uint64_t p = 0; p < count; ++p) {
            if (static_cast<uint32_t>(p) == fmt.nar_pattern()) continue;
            RefDecoded d = ref_decode(static_cast<uint32_t>(p), fmt.n(), fmt.es());
            table.push_back({static_cast<uint32_t>(p), d.zero ? pmac::Dyadic() : d.value});
        }
        std::sort(table.begin(), table.end(),
                  [](const ValueEntry& a, const ValueEntry& b) { return a.value.compare(b.value) < 0; });
    }
    return table;
}

// Enumeration rounding oracle: nearest value, ties to the even pattern.
// Exhaustive over the table (P8 and P16 only; P32 would need 4G entries).
inline uint32_t enumerate_nearest(const pmac::Dyadic& v, pmac::PositFormat fmt)
{
    const auto& table = value_table(fmt);
    auto it = std::lower_bound(table.begin(), table.end(), v,
                               [](const ValueEntry& e, const pmac::Dyadic& x) {
                                   return e.value.compare(x) < 0;
                               });
    if (it == table.end()) return table.back().pattern;
    if (it == table.begin()) return table.front().pattern;
    const ValueEntry& hi = *it;
    const ValueEntry& lo = *(it - 1);
    pmac::Dyadic d_lo = v - lo.value;
    pmac::Dyadic d_hi = hi.value - v;
    int c = d_lo.compare(d_hi);
    if (c < 0) return lo.pattern;
    if (c > 0) return hi.pattern;
    return (lo.pattern & 1) ? hi.pattern : lo.pattern;
}

}  // namespace refo
