#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "engine.hpp"
#include "oracle.hpp"

namespace dedup {

struct StreamMetrics {
    uint64_t writes = 0, reads = 0;
    uint64_t oracle_duplicates = 0;
    uint64_t inline_deduped = 0;
    uint64_t written_new = 0, materialized = 0;
    uint64_t cache_hits = 0, cache_misses = 0, cache_rejections = 0, cache_admissions = 0;
    uint64_t occupancy_final = 0;
};

// Everything summary.json reports for one replay.
struct RunMetrics {
    std::string mode;
    std::string trace;
    uint64_t seed = 0;
    uint64_t cache_entries = 0;
    std::string policy;
    double sample_rate = 0;
    double admission_epsilon = 0;
    uint32_t initial_threshold = 0;
    uint32_t fixed_threshold = 0;
    uint64_t pp_interval = 0;

    uint64_t total_requests = 0, total_writes = 0, total_reads = 0;
    uint64_t distinct_fingerprints = 0;
    uint64_t total_duplicates = 0;  // oracle ground truth

    uint64_t inline_deduped = 0, postprocess_deduped = 0;
    uint64_t written_new = 0, materialized = 0, rewrite_nops = 0;
    uint64_t unmapped_reads = 0;

    uint64_t cache_hits = 0, cache_misses = 0;
    uint64_t fingerprints_admitted = 0, cache_rejections = 0, cache_evictions = 0;

    uint64_t peak_blocks = 0, live_blocks_final = 0;
    uint64_t postprocess_passes = 0, gc_freed = 0;

    uint64_t estimator_intervals = 0, estimate_errors = 0;
    double eif_final = 0;
    double mean_lp_ms = 0;
    double estimator_mean_rel_error = 0;  // vs the exact per-interval oracle
    uint64_t memory_overhead_bytes = 0;

    uint64_t buffer_hits = 0, buffer_misses = 0;

    bool exact_after_postprocess = false;  // live blocks == distinct fingerprints
    bool reads_resolve_last_write = false;

    std::map<StreamId, StreamMetrics> per_stream;

    // inline_deduped / total_duplicates; 0 by convention without duplicates
    double inline_dedup_ratio() const {
        return total_duplicates == 0
                   ? 0.0
                   : static_cast<double>(inline_deduped) / static_cast<double>(total_duplicates);
    }

    // cache_hits / fingerprints_admitted; 0 when nothing was admitted
    double average_hits() const {
        return fingerprints_admitted == 0
                   ? 0.0
                   : static_cast<double>(cache_hits) / static_cast<double>(fingerprints_admitted);
    }
};

// Sampling-buffer memory cost: EI * p * (fpSize + counterSize) with
// EI = eif * cache_entries, a 16-byte fingerprint and a 4-byte counter.
uint64_t memory_overhead_bytes(double eif, double sample_rate, uint64_t cache_entries);

}  // namespace dedup
