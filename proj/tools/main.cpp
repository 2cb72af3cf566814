// dedupsim command line: workload generation, trace replay through the
// deduplication engine, and exact ground-truth statistics. Built entirely on
// the public C API of the shared library.

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dedupsim/dedupsim.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

int status_to_exit(dsim_status rc) {
    switch (rc) {
        case DSIM_OK: return kExitOk;
        case DSIM_ERR_CONFIG: return kExitUsage;
        default: return kExitRuntime;
    }
}

int report_failure(dsim_status rc, const char* what) {
    std::fprintf(stderr, "dedupsim: %s: %s\n", what, dsim_last_error());
    return status_to_exit(rc);
}

std::vector<std::string> split_modes(const std::string& csv) {
    std::vector<std::string> out;
    size_t start = 0;
    while (start <= csv.size()) {
        size_t pos = csv.find(',', start);
        std::string tok = csv.substr(start, pos == std::string::npos ? pos : pos - start);
        if (!tok.empty()) out.push_back(tok);
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

struct EngineGuard {
    dsim_engine* e = nullptr;
    ~EngineGuard() { dsim_engine_free(e); }
};

int cmd_generate(const std::string& preset, const std::string& spec_file, double scale,
                 uint64_t seed, const std::string& out) {
    dsim_mixspec* spec = nullptr;
    if (!spec_file.empty())
        spec = dsim_mixspec_load(spec_file.c_str());
    else
        spec = dsim_mixspec_preset(preset.c_str(), scale);
    if (!spec) return report_failure(DSIM_ERR_CONFIG, "generate");

    dsim_status rc = dsim_generate(spec, seed, out.c_str());
    if (rc != DSIM_OK) {
        dsim_mixspec_free(spec);
        return report_failure(rc, "generate");
    }
    size_t streams = dsim_mixspec_streams(spec);
    uint64_t total = 0;
    std::printf("wrote %s: %zu streams, seed %llu\n", out.c_str(), streams,
                static_cast<unsigned long long>(seed));
    for (size_t i = 0; i < streams; ++i) {
        uint64_t n = dsim_mixspec_requests(spec, i);
        total += n;
        std::printf("  stream %zu: %llu requests\n", i, static_cast<unsigned long long>(n));
    }
    std::printf("  total: %llu requests\n", static_cast<unsigned long long>(total));
    dsim_mixspec_free(spec);
    return kExitOk;
}

int cmd_replay(const std::string& trace, const std::string& modes_csv, const dsim_options& base,
               const std::string& out_dir) {
    auto modes = split_modes(modes_csv);
    if (modes.empty()) {
        std::fprintf(stderr, "dedupsim: replay: no mode given\n");
        return kExitUsage;
    }

    std::vector<EngineGuard> engines(modes.size());
    for (size_t i = 0; i < modes.size(); ++i) {
        dsim_options opts = base;
        opts.mode = modes[i].c_str();
        engines[i].e = dsim_engine_create(&opts);
        if (!engines[i].e) return report_failure(DSIM_ERR_CONFIG, "replay");

        dsim_status rc = dsim_engine_replay(engines[i].e, trace.c_str());
        if (rc != DSIM_OK) return report_failure(rc, "replay");

        std::string dir = modes.size() == 1 ? out_dir : out_dir + "/" + modes[i];
        rc = dsim_engine_report(engines[i].e, dir.c_str());
        if (rc != DSIM_OK) return report_failure(rc, "replay");

        double ratio = 0, hits = 0, peak = 0;
        dsim_engine_metric(engines[i].e, "inline_dedup_ratio", &ratio);
        dsim_engine_metric(engines[i].e, "average_hits", &hits);
        dsim_engine_metric(engines[i].e, "peak_blocks", &peak);
        std::printf("%s: inline_dedup_ratio=%.4f average_hits=%.3f peak_blocks=%.0f\n",
                    modes[i].c_str(), ratio, hits, peak);
    }

    if (modes.size() > 1) {
        std::vector<const dsim_engine*> ptrs;
        for (auto& g : engines) ptrs.push_back(g.e);
        dsim_status rc = dsim_write_compare(ptrs.data(), ptrs.size(), out_dir.c_str());
        if (rc != DSIM_OK) return report_failure(rc, "compare");
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"block-level hybrid deduplication trace harness"};
    app.require_subcommand(1);

    // generate
    std::string preset, spec_file, gen_out = "trace.csv";
    double scale = 1.0;
    uint64_t gen_seed = 1;
    auto* gen = app.add_subcommand("generate", "synthesize a multi-stream trace");
    auto* preset_opt = gen->add_option("--preset", preset, "preset name (workload-A/B/C, ...)");
    auto* spec_opt = gen->add_option("--spec", spec_file, "mix config file");
    gen->add_option("--scale", scale, "request count multiplier")->check(CLI::PositiveNumber);
    gen->add_option("--seed", gen_seed, "generator seed");
    gen->add_option("--out", gen_out, "output trace path");
    preset_opt->excludes(spec_opt);

    // replay
    std::string trace, modes = "hpdedup", out_dir = "out", policy = "lru";
    dsim_options opts;
    dsim_options_init(&opts);
    uint64_t cache_entries = opts.cache_entries, pp_interval = 0, store_capacity = 0, seed = 1;
    double sample_rate = opts.sample_rate, eif = 0.0, epsilon = opts.admission_epsilon;
    uint32_t threshold = opts.initial_threshold, fixed_threshold = 0;
    auto* rep = app.add_subcommand("replay", "replay a trace through the engine");
    rep->add_option("trace", trace, "trace file")->required();
    rep->add_option("--mode", modes,
                    "engine mode(s), comma separated: hpdedup, idedup-baseline, "
                    "postprocess-only, diode-gate");
    rep->add_option("--cache-entries", cache_entries, "fingerprint cache capacity");
    rep->add_option("--policy", policy, "per-stream cache policy: lru, lfu, arc");
    rep->add_option("--sample-rate", sample_rate, "reservoir sampling rate");
    rep->add_option("--eif", eif, "fixed estimation interval factor (default: adaptive)");
    rep->add_option("--epsilon", epsilon, "admission epsilon");
    rep->add_option("--threshold", threshold, "initial duplicate-sequence threshold");
    rep->add_option("--fixed-threshold", fixed_threshold, "disable adaptation, fix T");
    rep->add_option("--pp-interval", pp_interval, "writes between post-processing passes");
    rep->add_option("--store-capacity", store_capacity, "block store capacity (0 = unbounded)");
    rep->add_option("--seed", seed, "engine seed");
    rep->add_option("--out", out_dir, "report directory");

    // oracle
    std::string otrace, oracle_out = "oracle.json";
    uint64_t interval = 10000;
    auto* orc = app.add_subcommand("oracle", "exact duplicate statistics for a trace");
    orc->add_option("trace", otrace, "trace file")->required();
    orc->add_option("--interval", interval, "LDSS interval length in writes");
    orc->add_option("--out", oracle_out, "output JSON path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    if (gen->parsed()) {
        if (preset.empty() && spec_file.empty()) {
            std::fprintf(stderr, "dedupsim: generate needs --preset or --spec\n");
            return kExitUsage;
        }
        return cmd_generate(preset, spec_file, scale, gen_seed, gen_out);
    }
    if (rep->parsed()) {
        opts.policy = policy.c_str();
        opts.cache_entries = cache_entries;
        opts.sample_rate = sample_rate;
        opts.eif = eif;
        opts.admission_epsilon = epsilon;
        opts.initial_threshold = threshold;
        opts.fixed_threshold = fixed_threshold;
        opts.pp_interval = pp_interval;
        opts.store_capacity = store_capacity;
        opts.seed = seed;
        return cmd_replay(trace, modes, opts, out_dir);
    }
    if (orc->parsed()) {
        dsim_status rc = dsim_oracle_stats(otrace.c_str(), interval, oracle_out.c_str());
        if (rc != DSIM_OK) return report_failure(rc, "oracle");
        std::printf("wrote %s\n", oracle_out.c_str());
        return kExitOk;
    }
    return kExitUsage;
}
