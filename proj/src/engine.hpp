#pragma once

#include <iosfwd>
#include <list>
#include <map>
#include <unordered_map>
#include <vector>

#include "blockstore.hpp"
#include "cache.hpp"
#include "postprocess.hpp"
#include "reservoir.hpp"
#include "smoothing.hpp"
#include "threshold.hpp"
#include "trace.hpp"
#include "unseen.hpp"

namespace dedup {

enum class EngineMode { Hpdedup, IdedupBaseline, PostprocessOnly, DiodeGate };

const char* mode_name(EngineMode mode);
EngineMode mode_from_name(const std::string& name);  // throws ConfigError

struct EngineConfig {
    EngineMode mode = EngineMode::Hpdedup;
    size_t cache_entries = 4096;
    CachePolicy policy = CachePolicy::Lru;
    double sample_rate = 0.15;
    double eif = 0.0;              // <= 0: start at 0.5 and adapt to 1 - d
    double admission_epsilon = 0.05;
    uint32_t initial_threshold = 16;
    uint32_t fixed_threshold = 0;  // > 0: fixed, adaptation off (baseline default 4)
    uint64_t store_capacity = 0;   // blocks; 0 = unbounded
    size_t data_buffer_blocks = 1 << 16;
    uint64_t seed = 1;
    std::ostream* event_log = nullptr;  // one line per outcome, for differential tests
};

enum class WriteOutcome { InlineDeduped, WrittenNew, Buffered };
enum class ReadOutcome { Resolved, Unmapped };

enum Trigger : uint32_t {
    kTriggerNone = 0,
    kTriggerIntervalEnd = 1,
    kTriggerDedupRatioDrop = 2,
    kTriggerStreamChange = 4,
};

// Statistics-only model of the SSD data buffer (duplicate-aware LRU keyed by
// content fingerprint). Never influences dedup decisions.
class DataBufferModel {
public:
    explicit DataBufferModel(size_t capacity) : capacity_(capacity) {}

    void touch(const Fingerprint& fp);
    uint64_t hits() const { return hits_; }
    uint64_t misses() const { return misses_; }

private:
    size_t capacity_;
    std::list<Fingerprint> lru_;
    std::unordered_map<Fingerprint, std::list<Fingerprint>::iterator, FingerprintHash> index_;
    uint64_t hits_ = 0, misses_ = 0;
};

struct EstimateRow {
    uint64_t interval;
    StreamId stream;
    uint64_t n_i;
    double u;
    double ldss;
    double predicted;
    double lp_ms;
    double oracle_ldss;  // exact within-interval value, for accuracy reporting
    bool bypassed;
};

struct OccupancyRow {
    uint64_t seq;
    StreamId stream;
    uint64_t entries, hits, misses, rejections;
};

struct ThresholdRow {
    uint64_t time;  // total writes processed when emitted
    StreamId stream;
    uint32_t threshold;
    double mean_d, mean_r, read_ratio;
};

struct Timeline {
    std::vector<EstimateRow> estimates;
    std::vector<OccupancyRow> occupancy;
    std::vector<ThresholdRow> thresholds;
};

struct StreamCounters {
    uint64_t writes = 0, reads = 0;
    uint64_t inline_deduped = 0, written_new = 0, materialized = 0, rewrite_nops = 0;
    uint64_t unmapped_reads = 0;
};

// The inline deduplication engine plus the modeled persistent state. Strictly
// single-threaded: records are handled in trace order and estimation runs
// inline at interval boundaries.
class Engine {
public:
    Engine(const EngineConfig& cfg, const TraceHeader& header);

    WriteOutcome handle_write(const TraceRecord& rec);
    ReadOutcome handle_read(const TraceRecord& rec);
    void handle(const TraceRecord& rec);

    // End of trace: closes read runs and flushes pending duplicate runs.
    void finish();

    // Stop-the-world exact-dedup pass over the store.
    PostprocessReport postprocess();

    uint32_t check_triggers() const;

    // Full referential-integrity sweep (store invariants, refcount totals).
    void check_integrity() const;

    const FingerprintCache& cache() const { return cache_; }
    const BlockStore& store() const { return store_; }
    const LbaMapping& lba_map() const { return lba_; }
    const EvictionWeights& weights() const { return weights_; }
    const Timeline& timeline() const { return timeline_; }
    const DataBufferModel& data_buffer() const { return buffer_; }
    const EngineConfig& config() const { return cfg_; }
    const std::vector<PostprocessReport>& postprocess_reports() const { return pp_reports_; }

    uint64_t total_writes() const { return total_writes_; }
    uint64_t total_reads() const { return total_reads_; }
    uint64_t inline_deduped() const { return inline_deduped_; }
    uint64_t written_new() const { return written_new_; }
    uint64_t materialized() const { return materialized_; }
    uint64_t rewrite_nops() const { return rewrite_nops_; }
    uint64_t unmapped_reads() const { return unmapped_reads_; }
    uint64_t postprocess_deduped() const { return postprocess_deduped_; }
    uint64_t estimator_invocations() const { return estimator_invocations_; }
    uint64_t estimate_errors() const { return estimate_errors_; }
    uint64_t interval_index() const { return interval_index_; }
    uint64_t interval_length() const { return interval_len_; }
    double current_eif() const { return eif_; }
    double sample_rate() const { return cfg_.sample_rate; }

    // Online proxy for the historical inline deduplication ratio.
    double inline_hit_fraction() const {
        return total_writes_ == 0
                   ? 0.0
                   : static_cast<double>(inline_deduped_) / static_cast<double>(total_writes_);
    }

    uint32_t threshold_of(StreamId s) const;
    const ThresholdState* threshold_state_of(StreamId s) const;  // null for unseen streams
    double predicted_ldss_of(StreamId s) const;  // < 0 when none yet
    const std::map<StreamId, StreamCounters>& stream_counters() const { return per_stream_; }

    bool estimator_enabled() const { return cfg_.mode == EngineMode::Hpdedup; }
    bool inline_enabled(StreamId s) const;

private:
    struct PendingEntry {
        Lba lba;
        Fingerprint fp;
        Pba matched;
    };

    struct StreamState {
        std::vector<PendingEntry> run;  // open duplicate run, LBA-contiguous hits
        ThresholdState threshold;
        SelfTunedSmoother smoother;
        double predicted_ldss = -1.0;
        bool read_run_open = false;
        Lba last_read_lba = 0;
        uint64_t read_run_len = 0;
        uint64_t interval_writes = 0;  // N_i of the open interval
        std::unordered_map<Fingerprint, uint32_t, FingerprintHash> interval_fps;
    };

    static constexpr size_t kRunCap = 64;
    static constexpr double kLdssFloor = 1.0;
    static constexpr double kRatioDropFactor = 0.5;

    EngineConfig cfg_;
    TraceHeader header_;
    FingerprintCache cache_;
    BlockStore store_;
    LbaMapping lba_;
    ReservoirSample reservoir_;
    Rng rng_;
    EvictionWeights weights_;
    DataBufferModel buffer_;
    Timeline timeline_;
    std::vector<PostprocessReport> pp_reports_;

    std::map<StreamId, StreamState> streams_;
    ThresholdState shared_threshold_;  // DIODE: one global adaptive threshold

    bool interval_clock_on_ = false;
    double eif_ = 0.5;
    uint64_t interval_len_ = 1;
    uint64_t interval_index_ = 0;
    uint64_t interval_write_count_ = 0;
    uint64_t window_len_ = 1;
    uint64_t window_writes_ = 0, window_deduped_ = 0;
    double prev_window_ratio_ = -1.0;
    bool ratio_drop_flag_ = false;
    bool stream_joined_ = false;

    uint64_t total_writes_ = 0, total_reads_ = 0;
    uint64_t inline_deduped_ = 0, written_new_ = 0, materialized_ = 0, rewrite_nops_ = 0;
    uint64_t unmapped_reads_ = 0, postprocess_deduped_ = 0;
    uint64_t estimator_invocations_ = 0, estimate_errors_ = 0;

    std::map<StreamId, StreamCounters> per_stream_;

    StreamState& state_for(StreamId s);
    ThresholdState& threshold_state(StreamId s, StreamState& st);
    bool thresholds_adaptive() const;
    uint32_t effective_threshold(StreamId s, StreamState& st) const;

    Pba write_new_block(const TraceRecord& rec);
    void flush_run(StreamId s, StreamState& st);
    void close_read_run(StreamId s, StreamState& st);
    void end_of_interval(uint32_t triggers);
    void reset_interval_clock();
    void note_window_write(bool deduped);
    void log_event(const char* kind, StreamId s, uint64_t a, const char* tag);
};

}  // namespace dedup
