/* dedupsim C API: block-level hybrid deduplication engine and trace-replay
 * harness behind a shared library. All functions return dsim_status; 0 means
 * success. On failure dsim_last_error() carries a message for the calling
 * thread. Handles are opaque and must be released with their _free function.
 */
#ifndef DEDUPSIM_H
#define DEDUPSIM_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define DSIM_API __declspec(dllexport)
#else
#define DSIM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dsim_status {
    DSIM_OK = 0,
    DSIM_ERR_RUNTIME = 1, /* integrity failure, estimation failure, I/O */
    DSIM_ERR_CONFIG = 2,  /* bad arguments, unknown preset/mode, parse errors */
} dsim_status;

/* Message for the most recent failure on this thread. Never NULL. */
DSIM_API const char* dsim_last_error(void);

/* ------------------------------------------------------------------ */
/* workload generation                                                  */

typedef struct dsim_mixspec dsim_mixspec;

/* Named presets: workload-A, workload-B, workload-C, fiu-mail, fiu-web,
 * fiu-home, cloud-ftp. `scale` multiplies the preset request counts. */
DSIM_API dsim_mixspec* dsim_mixspec_preset(const char* name, double scale);

/* Declarative config file: key=value plus [stream] / [overlap] sections. */
DSIM_API dsim_mixspec* dsim_mixspec_load(const char* path);

DSIM_API void dsim_mixspec_free(dsim_mixspec* spec);

DSIM_API size_t dsim_mixspec_streams(const dsim_mixspec* spec);
DSIM_API uint64_t dsim_mixspec_requests(const dsim_mixspec* spec, size_t stream);

/* Generates the mixed trace deterministically from (spec, seed). */
DSIM_API dsim_status dsim_generate(const dsim_mixspec* spec, uint64_t seed,
                                   const char* out_trace);

/* ------------------------------------------------------------------ */
/* replay                                                               */

typedef struct dsim_engine dsim_engine;

typedef struct dsim_options {
    const char* mode;   /* hpdedup | idedup-baseline | postprocess-only | diode-gate */
    const char* policy; /* lru | lfu | arc */
    uint64_t cache_entries;
    double sample_rate;        /* reservoir sampling rate, default 0.15 */
    double eif;                /* estimation interval factor; <= 0 adapts from 0.5 */
    double admission_epsilon;  /* default 0.05 */
    uint32_t initial_threshold; /* default 16 */
    uint32_t fixed_threshold;   /* > 0 disables threshold adaptation */
    uint64_t pp_interval;       /* writes between post-processing passes; 0 = end only */
    uint64_t store_capacity;    /* blocks; 0 = unbounded */
    uint64_t seed;
} dsim_options;

/* Fills in the defaults described above. */
DSIM_API void dsim_options_init(dsim_options* opts);

DSIM_API dsim_engine* dsim_engine_create(const dsim_options* opts);
DSIM_API void dsim_engine_free(dsim_engine* engine);

/* Replays a trace file through the engine: inline phase, post-processing at
 * the configured cadence plus a final exact pass, integrity checks. */
DSIM_API dsim_status dsim_engine_replay(dsim_engine* engine, const char* trace_path);

/* Scalar results of the finished replay. Known names include:
 * total_writes, total_duplicates, distinct_fingerprints, inline_deduped,
 * postprocess_deduped, inline_dedup_ratio, average_hits, cache_hits,
 * fingerprints_admitted, cache_rejections, peak_blocks, live_blocks_final,
 * estimator_intervals, memory_overhead_bytes, exact_after_postprocess. */
DSIM_API dsim_status dsim_engine_metric(const dsim_engine* engine, const char* name,
                                        double* out);

/* Writes summary.json and timeline.csv under out_dir. */
DSIM_API dsim_status dsim_engine_report(const dsim_engine* engine, const char* out_dir);

/* compare.csv over several finished engines (one row per mode and metric). */
DSIM_API dsim_status dsim_write_compare(const dsim_engine* const* engines, size_t count,
                                        const char* out_dir);

/* ------------------------------------------------------------------ */
/* ground truth                                                         */

/* Exact duplicate statistics and per-interval LDSS values for a trace,
 * written as JSON to out_path. interval_len of 0 defaults to 10000 writes. */
DSIM_API dsim_status dsim_oracle_stats(const char* trace_path, uint64_t interval_len,
                                       const char* out_path);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* DEDUPSIM_H */
