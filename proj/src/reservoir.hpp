#pragma once

#include <cstdint>
#include <map>
#include <unordered_map>
#include <vector>

#include "rng.hpp"
#include "trace.hpp"

namespace dedup {

// Histogram f[j] = number of distinct fingerprints occurring exactly j times.
struct FrequencyHistogram {
    std::map<uint64_t, uint64_t> f;

    uint64_t distinct() const {
        uint64_t n = 0;
        for (auto& [j, c] : f) n += c;
        return n;
    }
    uint64_t occurrences() const {
        uint64_t n = 0;
        for (auto& [j, c] : f) n += j * c;
        return n;
    }
    uint64_t max_multiplicity() const { return f.empty() ? 0 : f.rbegin()->first; }
    bool empty() const { return f.empty(); }
};

// Uniform reservoir over write-fingerprint occurrences of the mixed stream
// (algorithm R). Resident occurrences of the same (stream, fingerprint) pair
// aggregate into one entry with an occurrence count.
class ReservoirSample {
public:
    explicit ReservoirSample(size_t capacity);

    void offer(StreamId stream, const Fingerprint& fp, Rng& rng);
    void reset(size_t capacity);

    uint64_t seen() const { return seen_; }
    size_t capacity() const { return capacity_; }
    size_t held() const { return slots_.size(); }
    size_t distinct_entries() const { return counts_.size(); }

    // Fraction of offered occurrences currently represented: min(1, k/seen).
    double effective_rate() const {
        return seen_ <= capacity_ ? 1.0 : static_cast<double>(capacity_) / static_cast<double>(seen_);
    }

    uint64_t count_of(StreamId stream, const Fingerprint& fp) const;

    // FFH over the sampled occurrence counts, per stream or overall.
    FrequencyHistogram ffh_for_stream(StreamId stream) const;
    FrequencyHistogram ffh_all() const;

private:
    struct Key {
        StreamId stream;
        Fingerprint fp;
        bool operator==(const Key& o) const { return stream == o.stream && fp == o.fp; }
    };
    struct KeyHash {
        size_t operator()(const Key& k) const {
            return FingerprintHash{}(k.fp) * 1099511628211ULL ^ k.stream;
        }
    };

    size_t capacity_;
    uint64_t seen_ = 0;
    std::vector<Key> slots_;
    std::unordered_map<Key, uint64_t, KeyHash> counts_;

    void add(const Key& k);
    void drop(const Key& k);
};

}  // namespace dedup
