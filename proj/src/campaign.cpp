#include "pmac/campaign.hpp"

#include <algorithm>
#include <cassert>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "pmac/bits.hpp"

namespace pmac {

// ---------------------------------------------------------- vector files --

std::vector<VectorSequence> parse_vector_file(std::istream& in)
{
    std::vector<VectorSequence> seqs;
    std::string line;
    int lineno = 0;
    bool open = false;  // building a sequence

    auto fail = [&lineno](const std::string& what) {
        throw std::runtime_error("vector file line " + std::to_string(lineno) + ": " + what);
    };

    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string mode_s, a_s, b_s, en_s, exp_s;
        if (!(ls >> mode_s)) {  // blank: sequence boundary
            open = false;
            continue;
        }
        ls >> a_s >> b_s >> en_s;
        bool has_expected = static_cast<bool>(ls >> exp_s);
        std::string extra;
        if (ls >> extra) fail("trailing field '" + extra + "'");

        auto mode = mode_parse(mode_s);
        if (!mode) fail("bad mode '" + mode_s + "'");
        auto a = parse_hex(a_s, 8);
        auto b = parse_hex(b_s, 8);
        auto en = parse_hex(en_s, 1);
        if (!a || !b) fail("operands must be 8 hex digits");
        if (!en || *en > all_lanes_mask(*mode)) fail("bad enables '" + en_s + "'");
        std::optional<uint32_t> expected;
        if (has_expected) {
            expected = parse_hex(exp_s, 8);
            if (!expected) fail("expected word must be 8 hex digits");
        }

        if (!open || seqs.back().mode != *mode) {
            seqs.push_back(VectorSequence{*mode, {}});
            open = true;
        }
        seqs.back().issues.push_back(
            VectorIssue{*a, *b, static_cast<LaneMask>(*en), expected});
    }
    return seqs;
}

namespace {

std::string word_hex(uint32_t v, int digits)
{
    static const char* hexd = "0123456789abcdef";
    std::string s(digits, '0');
    for (int i = digits; i-- > 0;) {
        s[i] = hexd[v & 0xF];
        v >>= 4;
    }
    return s;
}

}  // namespace

void write_vector_file(std::ostream& out, std::span<const VectorSequence> seqs)
{
    out << "# mode a b enables [expected]\n";
    bool first = true;
    for (const auto& seq : seqs) {
        if (!first) out << "\n";  // sequence boundary
        first = false;
        for (const auto& issue : seq.issues) {
            out << mode_name(seq.mode) << " " << word_hex(issue.a, 8) << " "
                << word_hex(issue.b, 8) << " " << word_hex(issue.enables, 1);
            if (issue.expected) out << " " << word_hex(*issue.expected, 8);
            out << "\n";
        }
    }
}

// ------------------------------------------------------------- coverage --

void CoverageBins::merge(const CoverageBins& o)
{
    for (size_t i = 0; i < sign_combo.size(); ++i) sign_combo[i] += o.sign_combo[i];
    for (size_t i = 0; i < regime_len.size(); ++i) regime_len[i] += o.regime_len[i];
    zero_operands += o.zero_operands;
    nar_operands += o.nar_operands;
    tie_products += o.tie_products;
    issues += o.issues;
}

namespace {

void bin_operand(CoverageBins& bins, const DecodedPosit& d)
{
    switch (d.cls) {
        case PositClass::Zero: ++bins.zero_operands; return;
        case PositClass::NaR: ++bins.nar_operands; return;
        case PositClass::Normal: {
            int run = d.k >= 0 ? d.k + 1 : -d.k;
            ++bins.regime_len[static_cast<size_t>(run)];
            return;
        }
    }
}

void bin_pair(CoverageBins& bins, const DecodedPosit& a, const DecodedPosit& b)
{
    bin_operand(bins, a);
    bin_operand(bins, b);
    if (a.cls == PositClass::Normal && b.cls == PositClass::Normal)
        ++bins.sign_combo[(a.sign ? 2 : 0) | (b.sign ? 1 : 0)];
}

}  // namespace

std::string coverage_report(const CoverageBins& bins, Mode mode)
{
    std::ostringstream os;
    static const char* combos[4] = {"++", "+-", "-+", "--"};
    os << "issues: " << bins.issues << "\n";
    os << "sign combinations:";
    for (int i = 0; i < 4; ++i) os << " " << combos[i] << "=" << bins.sign_combo[i];
    os << "\nregime lengths:";
    int nb = lane_width(mode) - 1;
    for (int r = 1; r <= nb; ++r) os << " " << r << "=" << bins.regime_len[static_cast<size_t>(r)];
    os << "\nspecials: zero=" << bins.zero_operands << " nar=" << bins.nar_operands
       << " tie-products=" << bins.tie_products << "\n";
    return os.str();
}

// ------------------------------------------------------------ tie pairs --

namespace {

// Largest non-negative pattern whose value does not exceed |v| (v > 0).
uint32_t floor_pattern(const Dyadic& v, PositFormat fmt)
{
    uint32_t lo = 0, hi = fmt.maxpos_pattern();
    while (lo < hi) {
        uint32_t mid = lo + (hi - lo + 1) / 2;
        if (to_real(PositWord{mid, fmt}).compare(v) <= 0)
            lo = mid;
        else
            hi = mid - 1;
    }
    return lo;
}

bool product_is_tie(uint32_t a, uint32_t b, PositFormat fmt)
{
    Dyadic v = to_real(PositWord{a, fmt}).mul_small(to_real(PositWord{b, fmt}));
    uint32_t lo = floor_pattern(v, fmt);
    if (lo >= fmt.maxpos_pattern()) return false;
    Dyadic d_lo = v - to_real(PositWord{lo, fmt});
    Dyadic d_hi = to_real(PositWord{lo + 1, fmt}) - v;
    return !d_lo.is_zero() && d_lo == d_hi;
}

std::optional<uint32_t> exact_positive_pattern(uint64_t mant, int64_t exp, PositFormat fmt)
{
    Dyadic v(BigInt::from_u64(mant), exp);
    PositWord p = nearest_posit(v, fmt);
    if (p.bits == 0 || p.is_nar()) return std::nullopt;
    if (!(to_real(p) == v)) return std::nullopt;
    return p.bits;
}

}  // namespace

std::vector<std::pair<uint32_t, uint32_t>> make_tie_pairs(PositFormat fmt, size_t want, uint64_t seed)
{
    std::vector<std::pair<uint32_t, uint32_t>> out;
    if (fmt == PositFormat::p8) {
        for (uint32_t a = 1; a <= fmt.maxpos_pattern(); ++a) {
            for (uint32_t b = a; b <= fmt.maxpos_pattern(); ++b) {
                if (product_is_tie(a, b, fmt)) out.emplace_back(a, b);
                if (out.size() >= want) return out;
            }
        }
        return out;
    }

    // Construct: pick a pattern midpoint M = O * 2^q (O odd), factor
    // O = A * B, and realize A and B as exactly-representable mantissas at
    // scales that multiply back to q.
    SplitMix rng(seed);
    int guard = 0;
    while (out.size() < want && ++guard < 500000) {
        uint32_t c = 1 + static_cast<uint32_t>(rng.below(fmt.maxpos_pattern() - 1));
        Dyadic mid = (to_real(PositWord{c, fmt}) + to_real(PositWord{c + 1, fmt})).half();
        assert(mid.num().bit_length() <= 40);
        uint64_t odd = mid.num().low_u64();

        uint64_t a_mant = 0, b_mant = 0;
        for (int t = 0; t < 48 && !a_mant; ++t) {
            uint64_t cand = 1 + 2 * rng.below(1u << 9);
            if (cand <= odd && odd % cand == 0) {
                a_mant = cand;
                b_mant = odd / cand;
            }
        }
        if (!a_mant) continue;

        int abits = msb_index(a_mant) + 1;
        int bbits = msb_index(b_mant) + 1;
        for (int t = 0; t < 12; ++t) {
            int sf_a = static_cast<int>(rng.range(-fmt.sf_max() / 2, fmt.sf_max() / 2));
            int64_t xa = sf_a - (abits - 1);
            int64_t xb = mid.exp() - xa;
            auto pa = exact_positive_pattern(a_mant, xa, fmt);
            auto pb = exact_positive_pattern(b_mant, xb, fmt);
            if (pa && pb) {
                assert(product_is_tie(*pa, *pb, fmt));
                out.emplace_back(*pa, *pb);
                break;
            }
        }
        (void)bbits;
    }
    return out;
}

// ----------------------------------------------------------- campaigns --

namespace {

struct ShardResult
{
    uint64_t mismatched = 0;
    CoverageBins bins;
    std::vector<std::pair<uint64_t, VectorSequence>> failures;
};

SimdWord expected_word(const std::array<RefAccumulator, 4>& oracle, Mode mode)
{
    SimdWord w;
    for (int lane = 0; lane < lanes(mode); ++lane)
        w = set_lane(w, lane, mode, oracle[lane].read().bits);
    return w;
}

// Replays a sequence: per-issue expected words (when present) are compared
// against the engine readout, and the final readout is always compared
// against the exact oracle. When `fill_expected`, per-issue oracle readouts
// are written back so a dumped failure replays line by line.
bool check_sequence(VectorSequence& seq, const std::function<SimdWord(const MacEngine&)>& readout,
                    bool fill_expected)
{
    const Mode mode = seq.mode;
    const PositFormat fmt = lane_format(mode);
    MacEngine engine(mode);
    std::array<RefAccumulator, 4> oracle{RefAccumulator(fmt), RefAccumulator(fmt),
                                         RefAccumulator(fmt), RefAccumulator(fmt)};
    bool ok = true;
    for (auto& issue : seq.issues) {
        engine.issue_quiet(SimdWord{issue.a}, SimdWord{issue.b}, issue.enables);
        for (int lane = 0; lane < lanes(mode); ++lane) {
            if (!((issue.enables >> lane) & 1)) continue;
            oracle[lane].add(PositWord{get_lane(SimdWord{issue.a}, lane, mode), fmt},
                             PositWord{get_lane(SimdWord{issue.b}, lane, mode), fmt});
        }
        if (issue.expected) {
            SimdWord got = readout ? readout(engine) : engine.readout();
            if (got.bits != *issue.expected) ok = false;
        }
        if (fill_expected) issue.expected = expected_word(oracle, mode).bits;
    }
    SimdWord got = readout ? readout(engine) : engine.readout();
    if (got.bits != expected_word(oracle, mode).bits) ok = false;
    return ok;
}

// Stratified operand: regime run length uniform over the legal range,
// remaining bits random, sign applied by two's complement.
uint32_t gen_regime_pattern(PositFormat fmt, bool sign, SplitMix& rng)
{
    int nb = fmt.n() - 1;
    bool ones = rng.chance(1, 2);
    int max_run = ones ? nb : nb - 1;
    int run = 1 + static_cast<int>(rng.below(static_cast<uint64_t>(max_run)));
    uint32_t body;
    if (ones && run == nb) {
        body = mask_bits(nb);  // maxpos
    } else {
        int rem = nb - run - 1;
        uint32_t tail = rem > 0 ? static_cast<uint32_t>(rng.below(uint64_t{1} << rem)) : 0;
        if (ones)
            body = (mask_bits(run) << (rem + 1)) | tail;
        else
            body = (uint32_t{1} << rem) | tail;
    }
    return sign ? twos_complement(body, fmt) : body;
}

VectorSequence gen_sequence(const CampaignConfig& cfg, uint64_t index,
                            const std::vector<std::pair<uint32_t, uint32_t>>& ties,
                            CoverageBins& bins)
{
    const Mode mode = cfg.mode;
    const PositFormat fmt = lane_format(mode);
    SplitMix rng(cfg.seed, index);
    VectorSequence seq{mode, {}};
    int len = 1 + static_cast<int>(rng.below(static_cast<uint64_t>(cfg.max_issues)));
    for (int i = 0; i < len; ++i) {
        VectorIssue issue;
        SimdWord a, b;
        for (int lane = 0; lane < lanes(mode); ++lane) {
            uint32_t av, bv;
            uint64_t kind = rng.below(100);
            if (kind < 8 && !ties.empty()) {
                auto [ta, tb] = ties[rng.below(ties.size())];
                av = rng.chance(1, 2) ? twos_complement(ta, fmt) : ta;
                bv = rng.chance(1, 2) ? twos_complement(tb, fmt) : tb;
                ++bins.tie_products;
            } else if (kind < 15) {
                av = rng.chance(1, 2) ? 0 : gen_regime_pattern(fmt, rng.chance(1, 2), rng);
                bv = av == 0 ? gen_regime_pattern(fmt, rng.chance(1, 2), rng) : 0;
            } else if (kind < 20) {
                av = rng.chance(1, 2) ? fmt.nar_pattern()
                                      : gen_regime_pattern(fmt, rng.chance(1, 2), rng);
                bv = av == fmt.nar_pattern()
                         ? gen_regime_pattern(fmt, rng.chance(1, 2), rng)
                         : fmt.nar_pattern();
            } else {
                // Forced sign-combination rotation covers all four bins.
                unsigned combo = static_cast<unsigned>(index + i + lane) & 3;
                av = gen_regime_pattern(fmt, combo & 2, rng);
                bv = gen_regime_pattern(fmt, combo & 1, rng);
            }
            a = set_lane(a, lane, mode, av);
            b = set_lane(b, lane, mode, bv);
        }
        issue.a = a.bits;
        issue.b = b.bits;
        issue.enables = rng.chance(1, 8)
                            ? static_cast<LaneMask>(rng.below(all_lanes_mask(mode) + 1u))
                            : all_lanes_mask(mode);
        seq.issues.push_back(issue);
    }
    return seq;
}

VectorSequence gen_exhaustive_p8(uint64_t index)
{
    // Sequence i packs single-pair cases 4i .. 4i+3 into the four lanes.
    VectorSequence seq{Mode::P8, {}};
    SimdWord a, b;
    for (int lane = 0; lane < 4; ++lane) {
        uint64_t case_idx = index * 4 + static_cast<uint64_t>(lane);
        a = set_lane(a, lane, Mode::P8, static_cast<uint32_t>(case_idx >> 8));
        b = set_lane(b, lane, Mode::P8, static_cast<uint32_t>(case_idx & 0xFF));
    }
    seq.issues.push_back(VectorIssue{a.bits, b.bits, all_lanes_mask(Mode::P8), std::nullopt});
    return seq;
}

CampaignResult run_indexed(uint64_t nseq, const CampaignConfig& cfg,
                           const std::function<VectorSequence(uint64_t, CoverageBins&)>& gen)
{
    CampaignResult total;
    total.sequences = nseq;

    std::vector<ShardResult> shards;
#pragma omp parallel if (cfg.parallel)
    {
        ShardResult local;
#pragma omp for schedule(dynamic, 256) nowait
        for (int64_t i = 0; i < static_cast<int64_t>(nseq); ++i) {
            VectorSequence seq = gen(static_cast<uint64_t>(i), local.bins);
            if (!check_sequence(seq, cfg.readout, false)) {
                ++local.mismatched;
                if (local.failures.size() < cfg.max_dumped_failures) {
                    check_sequence(seq, cfg.readout, true);  // fill oracle expectations
                    local.failures.emplace_back(static_cast<uint64_t>(i), std::move(seq));
                }
            }
        }
#pragma omp critical
        shards.push_back(std::move(local));
    }

    std::vector<std::pair<uint64_t, VectorSequence>> failures;
    for (auto& s : shards) {
        total.mismatched += s.mismatched;
        total.bins.merge(s.bins);
        for (auto& f : s.failures) failures.push_back(std::move(f));
    }
    std::sort(failures.begin(), failures.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    if (failures.size() > cfg.max_dumped_failures) failures.resize(cfg.max_dumped_failures);
    for (auto& f : failures) total.failures.push_back(std::move(f.second));
    return total;
}

}  // namespace

CampaignResult run_conformance(const CampaignConfig& cfg)
{
    if (cfg.exhaustive) {
        if (cfg.mode != Mode::P8)
            throw std::invalid_argument("exhaustive campaigns are p8 only");
        return run_indexed(65536 / 4, cfg, [](uint64_t i, CoverageBins& bins) {
            VectorSequence seq = gen_exhaustive_p8(i);
            ++bins.issues;
            auto da = MacEngine::unpack(SimdWord{seq.issues[0].a}, Mode::P8);
            auto db = MacEngine::unpack(SimdWord{seq.issues[0].b}, Mode::P8);
            for (int lane = 0; lane < 4; ++lane) bin_pair(bins, da[lane], db[lane]);
            return seq;
        });
    }

    auto ties = make_tie_pairs(lane_format(cfg.mode), 128, cfg.seed ^ 0x7157BA1Eull);
    return run_indexed(cfg.count, cfg, [&cfg, &ties](uint64_t i, CoverageBins& bins) {
        VectorSequence seq = gen_sequence(cfg, i, ties, bins);
        for (const auto& issue : seq.issues) {
            ++bins.issues;
            auto da = MacEngine::unpack(SimdWord{issue.a}, cfg.mode);
            auto db = MacEngine::unpack(SimdWord{issue.b}, cfg.mode);
            for (int lane = 0; lane < lanes(cfg.mode); ++lane) bin_pair(bins, da[lane], db[lane]);
        }
        return seq;
    });
}

CampaignResult run_vector_sequences(std::span<const VectorSequence> seqs, bool parallel,
                                    const std::function<SimdWord(const MacEngine&)>& readout)
{
    CampaignConfig cfg;
    cfg.parallel = parallel;
    cfg.readout = readout;
    cfg.max_dumped_failures = 64;
    return run_indexed(seqs.size(), cfg, [&seqs](uint64_t i, CoverageBins& bins) {
        VectorSequence seq = seqs[i];
        for (const auto& issue : seq.issues) {
            ++bins.issues;
            auto da = MacEngine::unpack(SimdWord{issue.a}, seq.mode);
            auto db = MacEngine::unpack(SimdWord{issue.b}, seq.mode);
            for (int lane = 0; lane < lanes(seq.mode); ++lane) bin_pair(bins, da[lane], db[lane]);
        }
        return seq;
    });
}

}  // namespace pmac
