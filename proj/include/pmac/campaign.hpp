#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pmac/engine.hpp"
#include "pmac/oracle.hpp"

namespace pmac {

// One line of a vector file: issue (a, b) under `enables`; `expected` is the
// full readout word after this issue when present.
struct VectorIssue
{
    uint32_t a = 0;
    uint32_t b = 0;
    LaneMask enables = 0;
    std::optional<uint32_t> expected;
};

// A run of issues through one engine instance. In the text format a
// sequence ends at a blank line or a mode change.
struct VectorSequence
{
    Mode mode = Mode::P8;
    std::vector<VectorIssue> issues;
};

// Text format: `mode a_hex b_hex enables_hex [expected_hex]`, `#` comments.
std::vector<VectorSequence> parse_vector_file(std::istream& in);  // throws with line numbers
void write_vector_file(std::ostream& out, std::span<const VectorSequence> seqs);

struct CoverageBins
{
    std::array<uint64_t, 4> sign_combo{};    // ++ +- -+ --
    std::array<uint64_t, 32> regime_len{};   // per-operand regime run length
    uint64_t zero_operands = 0;
    uint64_t nar_operands = 0;
    uint64_t tie_products = 0;
    uint64_t issues = 0;

    void merge(const CoverageBins& o);
};

struct CampaignConfig
{
    Mode mode = Mode::P8;
    uint64_t count = 1000;  // sequences; ignored when exhaustive
    uint64_t seed = 1;
    bool exhaustive = false;  // all 65536 single-pair P8 cases
    int max_issues = 1;       // accumulations per sequence, randomized in [1, max]
    bool parallel = true;
    size_t max_dumped_failures = 64;
    // Readout hook, replaceable by tests to prove the harness detects
    // faults. Must be pure; it runs concurrently across shards.
    std::function<SimdWord(const MacEngine&)> readout = {};
};

struct CampaignResult
{
    uint64_t sequences = 0;
    uint64_t mismatched = 0;
    CoverageBins bins;
    // Failing sequences, per-issue expected filled in from the oracle,
    // capped at max_dumped_failures; replayable as a vector file.
    std::vector<VectorSequence> failures;

    bool all_match() const { return mismatched == 0; }
};

// Differential campaign: stratified random vectors (all sign combinations,
// regime lengths up to the format maximum, zero/NaR specials, exact-tie
// products) through the engine, final readout compared lane-by-lane against
// the exact-arithmetic oracle. Deterministic for a given config; shards
// across OpenMP threads when parallel.
CampaignResult run_conformance(const CampaignConfig& cfg);

// Replay sequences from a vector file; lines with an expected word are
// compared against the engine readout.
CampaignResult run_vector_sequences(std::span<const VectorSequence> seqs, bool parallel,
                                    const std::function<SimdWord(const MacEngine&)>& readout = {});

// Positive-pattern pairs whose exact product is the midpoint of two
// adjacent patterns (round-to-nearest-even tie probes). P8 enumerates all
// of them; P16/P32 construct them by factoring pattern midpoints.
std::vector<std::pair<uint32_t, uint32_t>> make_tie_pairs(PositFormat fmt, size_t want, uint64_t seed);

std::string coverage_report(const CoverageBins& bins, Mode mode);

}  // namespace pmac
