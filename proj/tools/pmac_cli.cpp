// pmac command-line front end: posit inspection, engine-vs-oracle
// conformance campaigns, pipeline trace emission, and quantized inference.
//
// Exit codes: 0 all passed, 1 mismatch/accuracy failure, 2 usage or I/O
// error. Stable for CI use.

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "pmac/campaign.hpp"
#include "pmac/nn.hpp"

using namespace pmac;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitMismatch = 1;
constexpr int kExitUsage = 2;

PositFormat format_or_die(const std::string& name)
{
    auto fmt = PositFormat::parse(name);
    if (!fmt) throw CLI::ValidationError("format must be p8, p16 or p32");
    return *fmt;
}

int cmd_decode(const std::string& fmt_name, const std::string& hex)
{
    PositFormat fmt = format_or_die(fmt_name);
    auto bits = parse_hex(hex, fmt.hex_digits());
    if (!bits) {
        std::cerr << "error: '" << hex << "' is not " << fmt.hex_digits() << " hex digits\n";
        return kExitUsage;
    }
    PositWord w{*bits, fmt};
    std::cout << "format: " << fmt.name() << " (n=" << fmt.n() << ", es=" << fmt.es() << ")\n";
    std::cout << "pattern: " << to_hex(w) << "\n";
    DecodedPosit d = decode(w);
    switch (d.cls) {
        case PositClass::Zero:
            std::cout << "class: zero\nvalue: 0\n";
            break;
        case PositClass::NaR:
            std::cout << "class: nar\nvalue: (not a real)\n";
            break;
        case PositClass::Normal: {
            std::string frac_bits;
            for (int i = fmt.frac_width() - 2; i >= 0; --i)
                frac_bits.push_back(((d.frac >> i) & 1) ? '1' : '0');
            std::cout << "class: normal\n";
            std::cout << "sign: " << (d.sign ? 1 : 0) << "\nregime k: " << d.k
                      << "\nexponent: " << d.e << "\nscale factor: " << d.sf << "\n";
            std::cout << "fraction: 1." << frac_bits << "\n";
            std::cout << "value: " << to_real(w).to_fraction_string() << "\n";
            break;
        }
    }
    return kExitPass;
}

int cmd_conformance(const std::string& mode_name_s, uint64_t count, uint64_t seed,
                    bool exhaustive, int max_issues, bool serial,
                    const std::string& vectors_path, const std::string& dump_path)
{
    auto mode = mode_parse(mode_name_s);
    if (!mode) throw CLI::ValidationError("mode must be p8, p16 or p32");

    CampaignResult result;
    if (!vectors_path.empty()) {
        std::ifstream in(vectors_path);
        if (!in) {
            std::cerr << "error: cannot open " << vectors_path << "\n";
            return kExitUsage;
        }
        auto seqs = parse_vector_file(in);
        result = run_vector_sequences(seqs, !serial);
    } else {
        CampaignConfig cfg;
        cfg.mode = *mode;
        cfg.count = count;
        cfg.seed = seed;
        cfg.exhaustive = exhaustive;
        cfg.max_issues = max_issues;
        cfg.parallel = !serial;
        result = run_conformance(cfg);
    }

    uint64_t passed = result.sequences - result.mismatched;
    std::cout << "sequences: " << passed << "/" << result.sequences << " bit-exact\n";
    if (exhaustive)
        std::cout << "single-pair cases: " << passed * 4 << "/" << result.sequences * 4 << "\n";
    std::cout << coverage_report(result.bins, *mode);

    if (!result.failures.empty()) {
        std::ostream* out = &std::cerr;
        std::ofstream dump;
        if (!dump_path.empty()) {
            dump.open(dump_path);
            if (dump) out = &dump;
        }
        write_vector_file(*out, result.failures);
        if (!dump_path.empty())
            std::cerr << "dumped " << result.failures.size() << " failing sequences to "
                      << dump_path << "\n";
    }
    return result.all_match() ? kExitPass : kExitMismatch;
}

int cmd_trace(const std::string& operands_path, const std::string& out_path)
{
    std::ifstream in(operands_path);
    if (!in) {
        std::cerr << "error: cannot open " << operands_path << "\n";
        return kExitUsage;
    }
    auto seqs = parse_vector_file(in);

    std::ostringstream log;
    for (const auto& seq : seqs) {
        MacEngine engine(seq.mode);
        for (const auto& issue : seq.issues) {
            MacTrace t = engine.issue(SimdWord{issue.a}, SimdWord{issue.b}, issue.enables);
            log << format_trace(t);
        }
    }
    if (out_path.empty() || out_path == "-") {
        std::cout << log.str();
    } else {
        std::ofstream out(out_path);
        if (!out) {
            std::cerr << "error: cannot write " << out_path << "\n";
            return kExitUsage;
        }
        out << log.str();
    }
    return kExitPass;
}

int cmd_infer(const std::string& model_path, const std::string& data_dir,
              const std::string& precision, int samples, bool serial, bool reference_route,
              const std::string& csv_path)
{
    Model model = load_model(model_path);
    IdxImages images = read_idx_images(data_dir + "/test-images.idx3-ubyte");
    IdxLabels labels = read_idx_labels(data_dir + "/test-labels.idx1-ubyte");
    int n = samples > 0 ? samples : images.count;

    std::vector<std::pair<std::string, double>> rows;

    EvalConfig fcfg;
    fcfg.use_float = true;
    fcfg.parallel = !serial;
    EvalResult base = evaluate(model, images, labels, n, fcfg);
    double base_pct = 100.0 * base.accuracy();
    std::cout << "float64 baseline: " << base.correct << "/" << base.total << " (" << base_pct
              << "%)\n";
    rows.emplace_back("float64", base_pct);

    EvalConfig pcfg;
    pcfg.parallel = !serial;
    pcfg.route = reference_route ? DotRoute::Reference : DotRoute::Engine;

    std::vector<PositFormat> formats;
    if (precision == "all" || precision.empty()) {
        formats = {PositFormat::p8, PositFormat::p16, PositFormat::p32};
    } else if (precision == "float64") {
        // baseline only, printed above
    } else if (precision == "layered") {
        EvalResult r = evaluate(model, images, labels, n, pcfg);
        double pct = 100.0 * r.accuracy();
        std::cout << "layered (per-layer tags): " << r.correct << "/" << r.total << " (" << pct
                  << "%), delta " << pct - base_pct << " pt\n";
        rows.emplace_back("layered", pct);
    } else {
        formats = {format_or_die(precision)};
    }
    for (PositFormat fmt : formats) {
        pcfg.precision_override = fmt;
        EvalResult r = evaluate(model, images, labels, n, pcfg);
        double pct = 100.0 * r.accuracy();
        std::cout << fmt.name() << ": " << r.correct << "/" << r.total << " (" << pct
                  << "%), delta " << pct - base_pct << " pt\n";
        rows.emplace_back(fmt.name(), pct);
    }

    if (!csv_path.empty()) {
        std::ofstream csv(csv_path);
        if (!csv) {
            std::cerr << "error: cannot write " << csv_path << "\n";
            return kExitUsage;
        }
        csv << "precision,accuracy_percent,delta_vs_float64\n";
        for (auto& [name, pct] : rows) csv << name << "," << pct << "," << pct - base_pct << "\n";
    }
    return kExitPass;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"multi-precision SIMD posit MAC model"};
    app.require_subcommand(1);

    std::string dec_fmt, dec_hex;
    auto* dec = app.add_subcommand("decode", "unpack a posit word and print its fields");
    dec->add_option("format", dec_fmt, "p8 | p16 | p32")->required();
    dec->add_option("word", dec_hex, "fixed-width hex pattern (e.g. 6c)")->required();

    std::string conf_mode = "p8";
    uint64_t conf_count = 1000;
    uint64_t conf_seed = 1;
    bool conf_exhaustive = false;
    int conf_issues = 1;
    bool conf_serial = false;
    std::string conf_vectors, conf_dump;
    auto* conf =
        app.add_subcommand("conformance", "differential campaign: engine vs exact oracle");
    conf->add_option("mode", conf_mode, "p8 | p16 | p32")->required();
    conf->add_option("-n,--count", conf_count, "number of random sequences");
    conf->add_option("-s,--seed", conf_seed, "campaign seed (splitmix64 streams)");
    conf->add_flag("--exhaustive", conf_exhaustive, "all 65536 single-pair p8 cases");
    conf->add_option("--max-issues", conf_issues, "max accumulations per sequence");
    conf->add_flag("--serial", conf_serial, "disable OpenMP sharding");
    conf->add_option("--vectors", conf_vectors, "replay a vector file instead of generating");
    conf->add_option("--dump-failures", conf_dump, "write failing sequences to this file");

    std::string trace_in, trace_out;
    auto* trace = app.add_subcommand("trace", "emit per-stage MAC pipeline records");
    trace->add_option("operands", trace_in, "vector file of issues (expected column optional)")
        ->required();
    trace->add_option("-o,--output", trace_out, "output path (default stdout)");

    std::string inf_model, inf_data, inf_precision = "all", inf_csv;
    int inf_samples = 0;
    bool inf_serial = false, inf_reference = false;
    auto* inf = app.add_subcommand("infer", "quantized inference through the MAC engine");
    inf->add_option("--model", inf_model, "weights container file")->required();
    inf->add_option("--data", inf_data, "dataset directory (IDX files)")
        ->envname("PMAC_DATA_DIR")
        ->required();
    inf->add_option("--precision", inf_precision, "p8 | p16 | p32 | all | layered | float64");
    inf->add_option("--samples", inf_samples, "sample count (default: whole test set)");
    inf->add_flag("--serial", inf_serial, "disable OpenMP sample sharding");
    inf->add_flag("--reference-route", inf_reference,
                  "route dot products through the exact oracle instead of the engine");
    inf->add_option("--csv", inf_csv, "write an accuracy table as CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitPass : kExitUsage;
    }

    try {
        if (dec->parsed()) return cmd_decode(dec_fmt, dec_hex);
        if (conf->parsed())
            return cmd_conformance(conf_mode, conf_count, conf_seed, conf_exhaustive, conf_issues,
                                   conf_serial, conf_vectors, conf_dump);
        if (trace->parsed()) return cmd_trace(trace_in, trace_out);
        if (inf->parsed())
            return cmd_infer(inf_model, inf_data, inf_precision, inf_samples, inf_serial,
                             inf_reference, inf_csv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
