#include "cache.hpp"

#include <algorithm>
#include <cassert>

#include "errors.hpp"

namespace dedup {

// ---------------------------------------------------------------------------
// EvictionWeights

EvictionWeights EvictionWeights::from_predictions(
    const std::vector<std::pair<StreamId, double>>& predicted_ldss) {
    EvictionWeights w;
    std::vector<std::pair<StreamId, double>> sorted = predicted_ldss;
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    double acc = 0;
    for (const auto& [stream, ldss] : sorted) {
        if (!(ldss > 0))
            throw IntegrityError("eviction weights need positive LDSS for stream " +
                                 std::to_string(stream));
        double p = 1.0 / ldss;
        acc += p;
        w.segments_.push_back({stream, ldss, p, acc});
    }
    w.total_ = acc;
    return w;
}

StreamId EvictionWeights::pick(double r) const {
    assert(!segments_.empty());
    auto it = std::upper_bound(segments_.begin(), segments_.end(), r,
                               [](double v, const Segment& s) { return v < s.upper; });
    if (it == segments_.end()) --it;  // r == total due to rounding
    return it->stream;
}

std::optional<double> EvictionWeights::ldss_of(StreamId s) const {
    for (const auto& seg : segments_)
        if (seg.stream == s) return seg.ldss;
    return std::nullopt;
}

double EvictionWeights::max_ldss() const {
    double m = 0;
    for (const auto& seg : segments_) m = std::max(m, seg.ldss);
    return m;
}

double EvictionWeights::share(StreamId s) const {
    if (total_ <= 0) return 0;
    for (const auto& seg : segments_)
        if (seg.stream == s) return seg.priority / total_;
    return 0;
}

// ---------------------------------------------------------------------------
// FingerprintCache

FingerprintCache::FingerprintCache(const CacheConfig& cfg) : cfg_(cfg) {
    if (cfg.capacity < 1) throw ConfigError("cache capacity must be >= 1");
    if (cfg.admission_epsilon < 0.0 || cfg.admission_epsilon >= 1.0)
        throw ConfigError("admission epsilon must be in [0, 1)");
}

const CacheStreamStats& FingerprintCache::stream_stats(StreamId s) const {
    static const CacheStreamStats kZero{};
    auto it = stats_.find(s);
    return it == stats_.end() ? kZero : it->second;
}

std::optional<Pba> FingerprintCache::peek(const Fingerprint& fp) const {
    auto it = table_.find(fp);
    if (it == table_.end()) return std::nullopt;
    return it->second.pba;
}

std::optional<Pba> FingerprintCache::lookup(const Fingerprint& fp, StreamId requester) {
    auto it = table_.find(fp);
    if (it == table_.end()) {
        ++stats_[requester].misses;
        ++total_misses_;
        if (cfg_.policy == CachePolicy::Arc) {
            // a ghost hit adapts the ARC target size even though it misses
            auto& part = partitions_[partition_key(requester)];
            auto g = part.ghosts.find(fp);
            if (g != part.ghosts.end()) {
                double c = static_cast<double>(cfg_.capacity);
                if (g->second.first == 1) {
                    double ratio = part.b1.empty() ? 1.0
                                                   : static_cast<double>(part.b2.size()) /
                                                         static_cast<double>(part.b1.size());
                    part.arc_p = std::min(c, part.arc_p + std::max(1.0, ratio));
                } else {
                    double ratio = part.b2.empty() ? 1.0
                                                   : static_cast<double>(part.b1.size()) /
                                                         static_cast<double>(part.b2.size());
                    part.arc_p = std::max(0.0, part.arc_p - std::max(1.0, ratio));
                }
            }
        }
        return std::nullopt;
    }
    ++stats_[requester].hits;
    ++total_hits_;
    policy_touch(partitions_[partition_key(it->second.owner)], fp, it->second);
    return it->second.pba;
}

bool FingerprintCache::admit(const Fingerprint& fp, Pba pba, StreamId owner,
                             const EvictionWeights& weights, Rng& rng) {
    assert(!contains(fp));
    if (cfg_.mode == CacheMode::LdssPrioritized && !weights.empty()) {
        // streams without an estimate yet are exempt from the filter
        auto own = weights.ldss_of(owner);
        if (own && *own < cfg_.admission_epsilon * weights.max_ldss()) {
            ++stats_[owner].rejections;
            ++total_rejections_;
            return false;
        }
    }

    const StreamId pkey = partition_key(owner);
    auto& part = partitions_[pkey];
    if (cfg_.policy == CachePolicy::Arc) {
        auto g = part.ghosts.find(fp);
        part.arc_ctx.ghost_side = (g == part.ghosts.end()) ? 0 : g->second.first;
        part.arc_ctx.from_b2 = part.arc_ctx.ghost_side == 2;
        if (part.arc_ctx.ghost_side == 0) {
            // directory maintenance of the classic algorithm's miss case
            const size_t c = cfg_.capacity;
            const size_t l1 = part.t1.size() + part.b1.size();
            if (l1 >= c) {
                if (part.t1.size() < c) {
                    if (!part.b1.empty()) {
                        part.ghosts.erase(part.b1.back());
                        part.b1.pop_back();
                    }
                } else {
                    // cache is all T1 with no ghost room: drop the T1 LRU outright
                    part.arc_ctx.force_t1 = true;
                    part.arc_ctx.no_ghost = true;
                }
            } else {
                const size_t dir = l1 + part.t2.size() + part.b2.size();
                if (dir >= 2 * c && !part.b2.empty()) {
                    part.ghosts.erase(part.b2.back());
                    part.b2.pop_back();
                }
            }
        }
    }

    if (table_.size() >= cfg_.capacity) evict_one(weights, rng);

    Entry e;
    e.pba = pba;
    e.owner = owner;
    policy_insert(part, fp, e);
    part.arc_ctx = {};
    table_.emplace(fp, e);
    ++occupancy_[owner];
    ++stats_[owner].admissions;
    ++total_admissions_;
    return true;
}

CacheEntryInfo FingerprintCache::evict_one(const EvictionWeights& weights, Rng& rng) {
    if (table_.empty()) throw IntegrityError("evict_one on an empty cache");

    StreamId key = 0;
    if (cfg_.mode == CacheMode::LdssPrioritized) {
        std::vector<StreamId> non_empty;
        for (const auto& [s, part] : partitions_)
            if (part.resident > 0) non_empty.push_back(s);
        assert(!non_empty.empty());
        if (weights.empty()) {
            key = non_empty[rng.uniform(non_empty.size())];
        } else {
            // draw over the segments of non-empty partitions only: an empty
            // partition must not donate its probability mass to a fixed
            // neighbour, or the drained stream's share lands on one victim
            double total = 0;
            for (const auto& seg : weights.segments())
                if (std::binary_search(non_empty.begin(), non_empty.end(), seg.stream))
                    total += seg.priority;
            if (total > 0) {
                double r = rng.uniform_real(total);
                double acc = 0;
                key = non_empty.back();
                for (const auto& seg : weights.segments()) {
                    if (!std::binary_search(non_empty.begin(), non_empty.end(), seg.stream))
                        continue;
                    acc += seg.priority;
                    if (r < acc) {
                        key = seg.stream;
                        break;
                    }
                }
            } else {
                // every non-empty partition lacks an estimate; fall back to
                // the next non-empty stream after a plain weighted draw
                StreamId chosen = weights.draw(rng);
                auto it = std::lower_bound(non_empty.begin(), non_empty.end(), chosen);
                if (it == non_empty.end()) it = non_empty.begin();
                key = *it;
            }
        }
    }
    auto& part = partitions_[key];
    const Fingerprint victim = policy_victim(part);
    auto it = table_.find(victim);
    assert(it != table_.end());
    CacheEntryInfo info{victim, it->second.pba, it->second.owner};
    policy_remove(part, victim, it->second, /*to_ghost=*/!part.arc_ctx.no_ghost);
    --occupancy_[info.owner];
    ++stats_[info.owner].evictions;
    ++total_evictions_;
    table_.erase(it);
    return info;
}

void FingerprintCache::rebind(const Fingerprint& fp, Pba pba) {
    auto it = table_.find(fp);
    if (it != table_.end()) it->second.pba = pba;
}

// ---------------------------------------------------------------------------
// per-partition replacement policies

void FingerprintCache::policy_insert(Partition& part, const Fingerprint& fp, Entry& e) {
    ++part.resident;
    switch (cfg_.policy) {
        case CachePolicy::Lru:
            part.lru.push_front(fp);
            e.pos = part.lru.begin();
            break;
        case CachePolicy::Lfu: {
            e.freq = 1;
            auto& bucket = part.lfu_buckets[1];
            bucket.push_back(fp);  // back = newest in bucket; evict from the front
            e.pos = std::prev(bucket.end());
            break;
        }
        case CachePolicy::Arc: {
            if (part.arc_ctx.ghost_side != 0) {
                // returning from a ghost list goes straight to T2
                auto g = part.ghosts.find(fp);
                if (g != part.ghosts.end()) {
                    (g->second.first == 1 ? part.b1 : part.b2).erase(g->second.second);
                    part.ghosts.erase(g);
                }
                part.t2.push_front(fp);
                e.pos = part.t2.begin();
                e.arc_list = 2;
            } else {
                part.t1.push_front(fp);
                e.pos = part.t1.begin();
                e.arc_list = 1;
            }
            break;
        }
    }
}

void FingerprintCache::policy_touch(Partition& part, const Fingerprint& fp, Entry& e) {
    switch (cfg_.policy) {
        case CachePolicy::Lru:
            part.lru.splice(part.lru.begin(), part.lru, e.pos);
            break;
        case CachePolicy::Lfu: {
            auto bucket = part.lfu_buckets.find(e.freq);
            bucket->second.erase(e.pos);
            if (bucket->second.empty()) part.lfu_buckets.erase(bucket);
            ++e.freq;
            auto& next = part.lfu_buckets[e.freq];
            next.push_back(fp);
            e.pos = std::prev(next.end());
            break;
        }
        case CachePolicy::Arc:
            // hits in T1 or T2 both move to the MRU end of T2
            (e.arc_list == 1 ? part.t1 : part.t2).erase(e.pos);
            part.t2.push_front(fp);
            e.pos = part.t2.begin();
            e.arc_list = 2;
            break;
    }
}

Fingerprint FingerprintCache::policy_victim(Partition& part) {
    switch (cfg_.policy) {
        case CachePolicy::Lru:
            assert(!part.lru.empty());
            return part.lru.back();
        case CachePolicy::Lfu:
            assert(!part.lfu_buckets.empty());
            // least frequent; ties resolved toward the least recently used
            return part.lfu_buckets.begin()->second.front();
        case CachePolicy::Arc: {
            bool from_t1;
            if (part.t1.empty())
                from_t1 = false;
            else if (part.t2.empty() || part.arc_ctx.force_t1)
                from_t1 = true;
            else {
                double t1n = static_cast<double>(part.t1.size());
                from_t1 = t1n > part.arc_p || (part.arc_ctx.from_b2 && t1n == part.arc_p);
            }
            return from_t1 ? part.t1.back() : part.t2.back();
        }
    }
    throw IntegrityError("unreachable policy");
}

void FingerprintCache::policy_remove(Partition& part, const Fingerprint& fp, Entry& e,
                                     bool to_ghost) {
    --part.resident;
    switch (cfg_.policy) {
        case CachePolicy::Lru:
            part.lru.erase(e.pos);
            break;
        case CachePolicy::Lfu: {
            auto bucket = part.lfu_buckets.find(e.freq);
            bucket->second.erase(e.pos);
            if (bucket->second.empty()) part.lfu_buckets.erase(bucket);
            break;
        }
        case CachePolicy::Arc: {
            (e.arc_list == 1 ? part.t1 : part.t2).erase(e.pos);
            if (to_ghost) {
                auto& ghost = e.arc_list == 1 ? part.b1 : part.b2;
                ghost.push_front(fp);
                part.ghosts[fp] = {e.arc_list, ghost.begin()};
                trim_ghosts(part);
            }
            break;
        }
    }
}

void FingerprintCache::trim_ghosts(Partition& part) {
    // backstop bound: each ghost list stays within the cache capacity
    while (part.b1.size() > cfg_.capacity) {
        part.ghosts.erase(part.b1.back());
        part.b1.pop_back();
    }
    while (part.b2.size() > cfg_.capacity) {
        part.ghosts.erase(part.b2.back());
        part.b2.pop_back();
    }
}

}  // namespace dedup
