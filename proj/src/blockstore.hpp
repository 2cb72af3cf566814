#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <unordered_map>
#include <vector>

#include "trace.hpp"

namespace dedup {

// On-disk fingerprint multi-table, reference counts and the PBA allocator,
// modeled in memory. A fingerprint may map to several PBAs until the
// post-processing pass merges them.
class BlockStore {
public:
    explicit BlockStore(uint64_t capacity_blocks = 0);  // 0 = unbounded

    // Allocates the lowest free PBA, extending the address space when the
    // free list is empty. Throws IntegrityError("store full") at capacity.
    Pba allocate();

    // Registers a freshly written block. Refcount starts at 0 and is driven
    // by the LBA mapping table.
    void add_block(const Fingerprint& fp, Pba pba);

    void ref(Pba pba);
    void unref(Pba pba);  // at zero: leaves the table and awaits garbage collection

    uint64_t refcount(Pba pba) const;
    const Fingerprint& fingerprint_of(Pba pba) const;  // throws on dead PBA
    bool is_live(Pba pba) const { return blocks_.count(pba) != 0; }

    // PBAs currently holding this fingerprint, ascending. Empty when none.
    std::vector<Pba> pbas_of(const Fingerprint& fp) const;

    // Fingerprints with more than one PBA (the post-processing work list).
    std::vector<Fingerprint> duplicate_fingerprints() const;

    uint64_t collect_garbage();  // moves zero-ref blocks to the free list

    uint64_t live_blocks() const { return occupied_; }
    uint64_t peak_blocks() const { return peak_; }
    uint64_t distinct_fingerprints() const { return table_.size(); }
    uint64_t pending_dead() const { return dead_.size(); }

    // Full sweep of internal invariants; throws IntegrityError with details.
    void check_integrity() const;

private:
    struct Block {
        Fingerprint fp;
        uint64_t refs = 0;
    };

    uint64_t capacity_;
    Pba next_pba_ = 0;
    std::set<Pba> free_list_;  // ordered: reuse the lowest address first
    std::vector<Pba> dead_;    // zero-ref, not yet collected
    std::unordered_map<Pba, Block> blocks_;
    std::unordered_map<Fingerprint, std::set<Pba>, FingerprintHash> table_;
    uint64_t occupied_ = 0;
    uint64_t peak_ = 0;
};

// (stream, LBA) -> PBA table with a reverse index for post-processing remaps.
// The table models the NVRAM-resident mapping; `durable` is that flag.
class LbaMapping {
public:
    std::optional<Pba> lookup(StreamId stream, Lba lba) const;

    // Installs or replaces a mapping, maintaining refcounts on both sides.
    void set(StreamId stream, Lba lba, Pba pba, BlockStore& store);

    size_t size() const { return map_.size(); }

    const std::vector<std::pair<StreamId, Lba>>& refs_of(Pba pba) const;

    template <typename Fn>
    void for_each(Fn&& fn) const {
        for (const auto& [key, pba] : map_) fn(stream_of(key), lba_of(key), pba);
    }

    bool durable = true;

private:
    static uint64_t key_of(StreamId s, Lba lba) {
        // LBAs are per-stream block indexes; 48 bits is plenty at this scale
        return (static_cast<uint64_t>(s) << 48) | (lba & 0xFFFFFFFFFFFFULL);
    }
    static StreamId stream_of(uint64_t key) { return static_cast<StreamId>(key >> 48); }
    static Lba lba_of(uint64_t key) { return key & 0xFFFFFFFFFFFFULL; }

    std::unordered_map<uint64_t, Pba> map_;
    std::unordered_map<Pba, std::vector<std::pair<StreamId, Lba>>> reverse_;

    void reverse_remove(Pba pba, StreamId s, Lba lba);
};

}  // namespace dedup
