#include "dedupsim/dedupsim.h"

#include <cstring>
#include <string>

#include "errors.hpp"
#include "oracle.hpp"
#include "report.hpp"
#include "runner.hpp"
#include "workload.hpp"

namespace {

thread_local std::string g_last_error = "";

dsim_status fail(dsim_status code, const char* what) {
    g_last_error = what ? what : "unknown error";
    return code;
}

template <typename Fn>
dsim_status guarded(Fn&& fn) {
    try {
        fn();
        return DSIM_OK;
    } catch (const dedup::ConfigError& e) {
        return fail(DSIM_ERR_CONFIG, e.what());
    } catch (const dedup::ParseError& e) {
        return fail(DSIM_ERR_CONFIG, e.what());
    } catch (const std::exception& e) {
        return fail(DSIM_ERR_RUNTIME, e.what());
    }
}

}  // namespace

struct dsim_mixspec {
    dedup::MixSpec spec;
};

struct dsim_engine {
    dedup::RunOptions opts;
    dedup::RunResult result;
    bool finished = false;
};

extern "C" {

const char* dsim_last_error(void) { return g_last_error.c_str(); }

dsim_mixspec* dsim_mixspec_preset(const char* name, double scale) {
    dsim_mixspec* out = nullptr;
    dsim_status rc = guarded([&] {
        if (!name) throw dedup::ConfigError("preset name is null");
        out = new dsim_mixspec{dedup::mix_preset(name, scale > 0 ? scale : 1.0)};
    });
    return rc == DSIM_OK ? out : nullptr;
}

dsim_mixspec* dsim_mixspec_load(const char* path) {
    dsim_mixspec* out = nullptr;
    dsim_status rc = guarded([&] {
        if (!path) throw dedup::ConfigError("config path is null");
        out = new dsim_mixspec{dedup::load_mixspec(path)};
    });
    return rc == DSIM_OK ? out : nullptr;
}

void dsim_mixspec_free(dsim_mixspec* spec) { delete spec; }

size_t dsim_mixspec_streams(const dsim_mixspec* spec) {
    return spec ? spec->spec.profiles.size() : 0;
}

uint64_t dsim_mixspec_requests(const dsim_mixspec* spec, size_t stream) {
    if (!spec || stream >= spec->spec.profiles.size()) return 0;
    return spec->spec.profiles[stream].request_count;
}

dsim_status dsim_generate(const dsim_mixspec* spec, uint64_t seed, const char* out_trace) {
    return guarded([&] {
        if (!spec || !out_trace) throw dedup::ConfigError("null argument to dsim_generate");
        dedup::generate_trace_file(spec->spec, seed, out_trace);
    });
}

void dsim_options_init(dsim_options* opts) {
    if (!opts) return;
    std::memset(opts, 0, sizeof(*opts));
    opts->mode = "hpdedup";
    opts->policy = "lru";
    opts->cache_entries = 4096;
    opts->sample_rate = 0.15;
    opts->eif = 0.0;
    opts->admission_epsilon = 0.05;
    opts->initial_threshold = 16;
    opts->fixed_threshold = 0;
    opts->pp_interval = 0;
    opts->store_capacity = 0;
    opts->seed = 1;
}

dsim_engine* dsim_engine_create(const dsim_options* opts) {
    dsim_engine* out = nullptr;
    dsim_status rc = guarded([&] {
        if (!opts) throw dedup::ConfigError("null options");
        dedup::RunOptions ro;
        ro.engine.mode = dedup::mode_from_name(opts->mode ? opts->mode : "hpdedup");
        std::string policy = opts->policy ? opts->policy : "lru";
        if (policy == "lru")
            ro.engine.policy = dedup::CachePolicy::Lru;
        else if (policy == "lfu")
            ro.engine.policy = dedup::CachePolicy::Lfu;
        else if (policy == "arc")
            ro.engine.policy = dedup::CachePolicy::Arc;
        else
            throw dedup::ConfigError("unknown policy '" + policy + "'");
        if (opts->cache_entries == 0) throw dedup::ConfigError("cache_entries must be >= 1");
        ro.engine.cache_entries = opts->cache_entries;
        ro.engine.sample_rate = opts->sample_rate;
        ro.engine.eif = opts->eif;
        ro.engine.admission_epsilon = opts->admission_epsilon;
        ro.engine.initial_threshold = opts->initial_threshold;
        ro.engine.fixed_threshold = opts->fixed_threshold;
        ro.engine.store_capacity = opts->store_capacity;
        ro.engine.seed = opts->seed;
        ro.pp_interval = opts->pp_interval;
        out = new dsim_engine{ro, {}, false};
    });
    return rc == DSIM_OK ? out : nullptr;
}

void dsim_engine_free(dsim_engine* engine) { delete engine; }

dsim_status dsim_engine_replay(dsim_engine* engine, const char* trace_path) {
    return guarded([&] {
        if (!engine || !trace_path) throw dedup::ConfigError("null argument to replay");
        engine->result = dedup::run_replay(engine->opts, trace_path);
        engine->finished = true;
    });
}

dsim_status dsim_engine_metric(const dsim_engine* engine, const char* name, double* out) {
    return guarded([&] {
        if (!engine || !name || !out) throw dedup::ConfigError("null argument to metric");
        if (!engine->finished) throw dedup::ConfigError("engine has not replayed a trace");
        const dedup::RunMetrics& m = engine->result.metrics;
        std::string k = name;
        double v;
        if (k == "total_requests") v = double(m.total_requests);
        else if (k == "total_writes") v = double(m.total_writes);
        else if (k == "total_reads") v = double(m.total_reads);
        else if (k == "distinct_fingerprints") v = double(m.distinct_fingerprints);
        else if (k == "total_duplicates") v = double(m.total_duplicates);
        else if (k == "inline_deduped") v = double(m.inline_deduped);
        else if (k == "postprocess_deduped") v = double(m.postprocess_deduped);
        else if (k == "written_new") v = double(m.written_new);
        else if (k == "materialized") v = double(m.materialized);
        else if (k == "inline_dedup_ratio") v = m.inline_dedup_ratio();
        else if (k == "average_hits") v = m.average_hits();
        else if (k == "cache_hits") v = double(m.cache_hits);
        else if (k == "cache_misses") v = double(m.cache_misses);
        else if (k == "fingerprints_admitted") v = double(m.fingerprints_admitted);
        else if (k == "cache_rejections") v = double(m.cache_rejections);
        else if (k == "cache_evictions") v = double(m.cache_evictions);
        else if (k == "peak_blocks") v = double(m.peak_blocks);
        else if (k == "live_blocks_final") v = double(m.live_blocks_final);
        else if (k == "unmapped_reads") v = double(m.unmapped_reads);
        else if (k == "estimator_intervals") v = double(m.estimator_intervals);
        else if (k == "memory_overhead_bytes") v = double(m.memory_overhead_bytes);
        else if (k == "eif_final") v = m.eif_final;
        else if (k == "exact_after_postprocess") v = m.exact_after_postprocess ? 1.0 : 0.0;
        else if (k == "reads_resolve_last_write") v = m.reads_resolve_last_write ? 1.0 : 0.0;
        else throw dedup::ConfigError("unknown metric '" + k + "'");
        *out = v;
    });
}

dsim_status dsim_engine_report(const dsim_engine* engine, const char* out_dir) {
    return guarded([&] {
        if (!engine || !out_dir) throw dedup::ConfigError("null argument to report");
        if (!engine->finished) throw dedup::ConfigError("engine has not replayed a trace");
        dedup::emit_report(engine->result.metrics, engine->result.timeline, out_dir);
    });
}

dsim_status dsim_write_compare(const dsim_engine* const* engines, size_t count,
                               const char* out_dir) {
    return guarded([&] {
        if (!engines || !out_dir) throw dedup::ConfigError("null argument to compare");
        std::vector<dedup::RunMetrics> runs;
        for (size_t i = 0; i < count; ++i) {
            if (!engines[i] || !engines[i]->finished)
                throw dedup::ConfigError("compare requires finished engines");
            runs.push_back(engines[i]->result.metrics);
        }
        dedup::write_compare(runs, out_dir);
    });
}

dsim_status dsim_oracle_stats(const char* trace_path, uint64_t interval_len,
                              const char* out_path) {
    return guarded([&] {
        if (!trace_path || !out_path) throw dedup::ConfigError("null argument to oracle");
        dedup::TraceReader reader(trace_path);
        auto records = reader.read_all();
        dedup::OracleIndex oracle;
        for (const auto& r : records) oracle.note(r);
        auto rows = dedup::oracle_ldss(records, interval_len ? interval_len : 10000);
        dedup::write_oracle_stats(oracle, rows, out_path);
    });
}

}  // extern "C"
