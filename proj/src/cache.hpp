#pragma once

#include <cstdint>
#include <list>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

#include "rng.hpp"
#include "trace.hpp"

namespace dedup {

enum class CachePolicy { Lru, Lfu, Arc };
enum class CacheMode { GlobalBaseline, LdssPrioritized };

struct CacheConfig {
    size_t capacity = 1024;
    CachePolicy policy = CachePolicy::Lru;
    CacheMode mode = CacheMode::GlobalBaseline;
    double admission_epsilon = 0.05;
};

// Victim-stream selection weights: p_i = 1 / predicted LDSS_i, mapped onto
// adjacent prefix segments of [0, sum p). Binary search replaces the paper's
// segment tree; the draw distribution is identical.
class EvictionWeights {
public:
    struct Segment {
        StreamId stream;
        double ldss;      // predicted LDSS backing this priority
        double priority;  // 1 / ldss
        double upper;     // prefix sum upper bound
    };

    EvictionWeights() = default;

    // Throws IntegrityError on a non-positive LDSS.
    static EvictionWeights from_predictions(
        const std::vector<std::pair<StreamId, double>>& predicted_ldss);

    bool empty() const { return segments_.empty(); }
    double total() const { return total_; }
    const std::vector<Segment>& segments() const { return segments_; }

    StreamId pick(double r) const;  // r in [0, total)
    StreamId draw(Rng& rng) const { return pick(rng.uniform_real(total_)); }

    // nullopt when the stream has no estimate yet
    std::optional<double> ldss_of(StreamId s) const;
    double max_ldss() const;
    double share(StreamId s) const;  // normalized priority, for tests/metrics

private:
    std::vector<Segment> segments_;  // sorted by stream id
    double total_ = 0;
};

struct CacheEntryInfo {
    Fingerprint fp;
    Pba pba = kInvalidPba;
    StreamId owner = 0;
};

struct CacheStreamStats {
    uint64_t hits = 0;
    uint64_t misses = 0;
    uint64_t rejections = 0;
    uint64_t admissions = 0;
    uint64_t evictions = 0;
};

// Fingerprint -> PBA cache with a shared capacity pool. In LdssPrioritized
// mode every stream gets its own logical partition (replacement metadata) and
// the eviction victim stream is drawn from EvictionWeights; in GlobalBaseline
// mode all entries live in a single partition governed by one policy.
class FingerprintCache {
public:
    explicit FingerprintCache(const CacheConfig& cfg);

    // On a hit updates the owning partition's replacement state; hit/miss is
    // accounted against the requesting stream.
    std::optional<Pba> lookup(const Fingerprint& fp, StreamId requester);

    // Pre: fp not resident. Returns false when the admission filter rejects
    // the stream. Evicts first when the pool is full.
    bool admit(const Fingerprint& fp, Pba pba, StreamId owner, const EvictionWeights& weights,
               Rng& rng);

    // Evicts one entry: the victim stream is drawn from the weights (empty
    // weights fall back to a uniform draw over non-empty partitions), the
    // victim entry follows that partition's own policy.
    CacheEntryInfo evict_one(const EvictionWeights& weights, Rng& rng);

    // Repoints an entry after post-processing merged its block away.
    void rebind(const Fingerprint& fp, Pba pba);

    bool contains(const Fingerprint& fp) const { return table_.count(fp) != 0; }
    std::optional<Pba> peek(const Fingerprint& fp) const;

    size_t size() const { return table_.size(); }
    size_t capacity() const { return cfg_.capacity; }
    const CacheConfig& config() const { return cfg_; }

    const CacheStreamStats& stream_stats(StreamId s) const;
    const std::map<StreamId, CacheStreamStats>& all_stream_stats() const { return stats_; }
    uint64_t total_hits() const { return total_hits_; }
    uint64_t total_misses() const { return total_misses_; }
    uint64_t total_admissions() const { return total_admissions_; }
    uint64_t total_rejections() const { return total_rejections_; }
    uint64_t total_evictions() const { return total_evictions_; }

    // entries currently owned per stream
    std::map<StreamId, size_t> occupancy() const { return occupancy_; }

private:
    using FpList = std::list<Fingerprint>;

    struct Entry {
        Pba pba;
        StreamId owner;
        uint64_t freq = 0;      // LFU
        uint8_t arc_list = 0;   // 1 = T1, 2 = T2
        FpList::iterator pos;
    };

    // transient context for one ARC admit: which ghost list the incoming
    // fingerprint came from, and the degenerate all-T1 miss case
    struct ArcCtx {
        uint8_t ghost_side = 0;  // 0 none, 1 = B1, 2 = B2
        bool from_b2 = false;
        bool force_t1 = false;
        bool no_ghost = false;
    };

    struct Partition {
        FpList lru;  // LRU order, front = MRU
        std::map<uint64_t, FpList> lfu_buckets;
        FpList t1, t2, b1, b2;  // ARC
        std::unordered_map<Fingerprint, std::pair<uint8_t, FpList::iterator>, FingerprintHash>
            ghosts;  // 1 = B1, 2 = B2
        double arc_p = 0;
        ArcCtx arc_ctx;
        size_t resident = 0;
    };

    CacheConfig cfg_;
    std::unordered_map<Fingerprint, Entry, FingerprintHash> table_;
    std::map<StreamId, Partition> partitions_;  // ordered: deterministic fallback scans
    std::map<StreamId, CacheStreamStats> stats_;
    std::map<StreamId, size_t> occupancy_;
    uint64_t total_hits_ = 0, total_misses_ = 0;
    uint64_t total_admissions_ = 0, total_rejections_ = 0, total_evictions_ = 0;

    StreamId partition_key(StreamId owner) const {
        return cfg_.mode == CacheMode::GlobalBaseline ? 0 : owner;
    }

    void policy_insert(Partition& part, const Fingerprint& fp, Entry& e);
    void policy_touch(Partition& part, const Fingerprint& fp, Entry& e);
    Fingerprint policy_victim(Partition& part);
    void policy_remove(Partition& part, const Fingerprint& fp, Entry& e, bool to_ghost);
    void trim_ghosts(Partition& part);
};

}  // namespace dedup
