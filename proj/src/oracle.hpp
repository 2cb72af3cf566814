#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "trace.hpp"

namespace dedup {

// Exact, memory-unconstrained ground truth about a trace: global and
// per-stream duplicate counts plus the last write per (stream, LBA). This is
// the brute-force reference all derived expectations check against.
class OracleIndex {
public:
    void note(const TraceRecord& rec);

    uint64_t writes() const { return writes_; }
    uint64_t reads() const { return reads_; }
    uint64_t distinct_fingerprints() const { return seen_.size(); }
    uint64_t duplicate_writes() const { return duplicate_writes_; }

    struct StreamStats {
        uint64_t writes = 0, reads = 0;
        uint64_t duplicates = 0;  // writes whose fingerprint occurred before, anywhere
    };
    const std::map<StreamId, StreamStats>& per_stream() const { return per_stream_; }

    std::optional<Fingerprint> last_write(StreamId s, Lba lba) const;

    template <typename Fn>
    void for_each_last_write(Fn&& fn) const {
        for (const auto& [key, fp] : last_write_)
            fn(static_cast<StreamId>(key >> 48), key & 0xFFFFFFFFFFFFULL, fp);
    }

private:
    std::unordered_set<Fingerprint, FingerprintHash> seen_;
    std::unordered_map<uint64_t, Fingerprint> last_write_;
    std::map<StreamId, StreamStats> per_stream_;
    uint64_t writes_ = 0, reads_ = 0, duplicate_writes_ = 0;
};

// Exact per-interval LDSS over fixed windows of `interval_len` writes of the
// mixed stream: per stream, LDSS = N_i - |distinct fingerprints of stream i|.
struct OracleLdssRow {
    uint64_t interval;
    StreamId stream;
    uint64_t writes;    // N_i
    uint64_t distinct;  // u_i
    uint64_t ldss;
};

std::vector<OracleLdssRow> oracle_ldss(const std::vector<TraceRecord>& records,
                                       uint64_t interval_len);

// Duplicate ratio of one stream's records (fraction of its writes repeating an
// earlier fingerprint of the same stream).
double stream_duplicate_ratio(const std::vector<TraceRecord>& records, StreamId stream);

}  // namespace dedup
