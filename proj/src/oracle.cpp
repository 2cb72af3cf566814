#include "oracle.hpp"

namespace dedup {

void OracleIndex::note(const TraceRecord& rec) {
    auto& st = per_stream_[rec.stream];
    if (!rec.is_write()) {
        ++reads_;
        ++st.reads;
        return;
    }
    ++writes_;
    ++st.writes;
    if (!seen_.insert(rec.fingerprint).second) {
        ++duplicate_writes_;
        ++st.duplicates;
    }
    last_write_[(static_cast<uint64_t>(rec.stream) << 48) | (rec.lba & 0xFFFFFFFFFFFFULL)] =
        rec.fingerprint;
}

std::optional<Fingerprint> OracleIndex::last_write(StreamId s, Lba lba) const {
    auto it = last_write_.find((static_cast<uint64_t>(s) << 48) | (lba & 0xFFFFFFFFFFFFULL));
    if (it == last_write_.end()) return std::nullopt;
    return it->second;
}

std::vector<OracleLdssRow> oracle_ldss(const std::vector<TraceRecord>& records,
                                       uint64_t interval_len) {
    std::vector<OracleLdssRow> out;
    if (interval_len == 0) return out;

    std::map<StreamId, std::unordered_set<Fingerprint, FingerprintHash>> distinct;
    std::map<StreamId, uint64_t> writes;
    uint64_t in_interval = 0, interval = 0;

    auto close = [&]() {
        for (const auto& [s, n] : writes) {
            uint64_t u = distinct[s].size();
            out.push_back({interval, s, n, u, n - u});
        }
        distinct.clear();
        writes.clear();
        in_interval = 0;
        ++interval;
    };

    for (const auto& rec : records) {
        if (!rec.is_write()) continue;
        distinct[rec.stream].insert(rec.fingerprint);
        ++writes[rec.stream];
        if (++in_interval >= interval_len) close();
    }
    if (in_interval > 0) close();
    return out;
}

double stream_duplicate_ratio(const std::vector<TraceRecord>& records, StreamId stream) {
    std::unordered_set<Fingerprint, FingerprintHash> seen;
    uint64_t writes = 0, dups = 0;
    for (const auto& rec : records) {
        if (rec.stream != stream || !rec.is_write()) continue;
        ++writes;
        if (!seen.insert(rec.fingerprint).second) ++dups;
    }
    return writes == 0 ? 0.0 : static_cast<double>(dups) / static_cast<double>(writes);
}

}  // namespace dedup
