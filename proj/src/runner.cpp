#include "runner.hpp"

#include <cmath>

#include "errors.hpp"

namespace dedup {

namespace {

class ReplayDriver {
public:
    ReplayDriver(const RunOptions& opts, const TraceHeader& header, const std::string& name)
        : opts_(opts), engine_(opts.engine, header), name_(name) {}

    void feed(const TraceRecord& rec) {
        oracle_.note(rec);
        engine_.handle(rec);
        if (rec.is_write() && opts_.pp_interval > 0 &&
            ++writes_since_pp_ >= opts_.pp_interval) {
            engine_.postprocess();
            writes_since_pp_ = 0;
        }
    }

    RunResult finish() {
        engine_.finish();
        engine_.postprocess();  // exact deduplication closes every run
        engine_.check_integrity();

        RunResult res;
        RunMetrics& m = res.metrics;
        const EngineConfig& cfg = engine_.config();
        m.mode = mode_name(cfg.mode);
        m.trace = name_;
        m.seed = cfg.seed;
        m.cache_entries = cfg.cache_entries;
        m.policy = cfg.policy == CachePolicy::Lru   ? "lru"
                   : cfg.policy == CachePolicy::Lfu ? "lfu"
                                                    : "arc";
        m.sample_rate = cfg.sample_rate;
        m.admission_epsilon = cfg.admission_epsilon;
        m.initial_threshold = cfg.initial_threshold;
        m.fixed_threshold = cfg.fixed_threshold;
        m.pp_interval = opts_.pp_interval;

        m.total_writes = engine_.total_writes();
        m.total_reads = engine_.total_reads();
        m.total_requests = m.total_writes + m.total_reads;
        m.distinct_fingerprints = oracle_.distinct_fingerprints();
        m.total_duplicates = oracle_.duplicate_writes();

        m.inline_deduped = engine_.inline_deduped();
        m.postprocess_deduped = engine_.postprocess_deduped();
        m.written_new = engine_.written_new();
        m.materialized = engine_.materialized();
        m.rewrite_nops = engine_.rewrite_nops();
        m.unmapped_reads = engine_.unmapped_reads();

        const auto& cache = engine_.cache();
        m.cache_hits = cache.total_hits();
        m.cache_misses = cache.total_misses();
        m.fingerprints_admitted = cache.total_admissions();
        m.cache_rejections = cache.total_rejections();
        m.cache_evictions = cache.total_evictions();

        m.peak_blocks = engine_.store().peak_blocks();
        m.live_blocks_final = engine_.store().live_blocks();
        m.postprocess_passes = engine_.postprocess_reports().size();
        for (const auto& rep : engine_.postprocess_reports()) m.gc_freed += rep.freed;

        m.estimator_intervals = engine_.estimator_invocations();
        m.estimate_errors = engine_.estimate_errors();
        m.eif_final = engine_.current_eif();
        m.memory_overhead_bytes =
            memory_overhead_bytes(m.eif_final, cfg.sample_rate, cfg.cache_entries);
        const auto& est_rows = engine_.timeline().estimates;
        double lp_sum = 0, err_sum = 0;
        uint64_t err_n = 0;
        for (const auto& r : est_rows) {
            lp_sum += r.lp_ms;
            if (r.oracle_ldss > 0 && !r.bypassed) {
                err_sum += std::abs(r.ldss - r.oracle_ldss) / r.oracle_ldss;
                ++err_n;
            }
        }
        m.mean_lp_ms = est_rows.empty() ? 0 : lp_sum / static_cast<double>(est_rows.size());
        m.estimator_mean_rel_error = err_n == 0 ? 0 : err_sum / static_cast<double>(err_n);

        m.buffer_hits = engine_.data_buffer().hits();
        m.buffer_misses = engine_.data_buffer().misses();

        // closed-run exactness: the store holds exactly one block per distinct
        // fingerprint, and every mapping resolves to the last written content
        m.exact_after_postprocess = m.live_blocks_final == m.distinct_fingerprints;
        bool reads_ok = true;
        oracle_.for_each_last_write([&](StreamId s, Lba lba, const Fingerprint& fp) {
            auto pba = engine_.lba_map().lookup(s, lba);
            if (!pba || !(engine_.store().fingerprint_of(*pba) == fp)) reads_ok = false;
        });
        m.reads_resolve_last_write = reads_ok;
        if (!m.exact_after_postprocess)
            throw IntegrityError("post-processing left " + std::to_string(m.live_blocks_final) +
                                 " live blocks for " + std::to_string(m.distinct_fingerprints) +
                                 " distinct fingerprints");
        if (!reads_ok)
            throw IntegrityError("a mapped LBA no longer resolves to its last written content");

        const auto occ = cache.occupancy();
        for (const auto& [s, sc] : engine_.stream_counters()) {
            StreamMetrics sm;
            sm.writes = sc.writes;
            sm.reads = sc.reads;
            sm.inline_deduped = sc.inline_deduped;
            sm.written_new = sc.written_new;
            sm.materialized = sc.materialized;
            const auto& cs = cache.stream_stats(s);
            sm.cache_hits = cs.hits;
            sm.cache_misses = cs.misses;
            sm.cache_rejections = cs.rejections;
            sm.cache_admissions = cs.admissions;
            auto oit = oracle_.per_stream().find(s);
            if (oit != oracle_.per_stream().end()) sm.oracle_duplicates = oit->second.duplicates;
            auto occ_it = occ.find(s);
            if (occ_it != occ.end()) sm.occupancy_final = occ_it->second;
            m.per_stream[s] = sm;
        }

        res.timeline = engine_.timeline();
        return res;
    }

private:
    RunOptions opts_;
    Engine engine_;
    OracleIndex oracle_;
    std::string name_;
    uint64_t writes_since_pp_ = 0;
};

}  // namespace

RunResult run_replay(const RunOptions& opts, const std::string& trace_path) {
    TraceReader reader(trace_path);
    ReplayDriver driver(opts, reader.header(), trace_path);
    TraceRecord rec;
    while (reader.next(rec)) driver.feed(rec);
    return driver.finish();
}

RunResult run_replay(const RunOptions& opts, const TraceHeader& header,
                     const std::vector<TraceRecord>& records, const std::string& trace_name) {
    ReplayDriver driver(opts, header, trace_name);
    for (const auto& rec : records) driver.feed(rec);
    return driver.finish();
}

}  // namespace dedup
