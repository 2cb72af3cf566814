#include "blockstore.hpp"

#include <algorithm>

#include "errors.hpp"

namespace dedup {

BlockStore::BlockStore(uint64_t capacity_blocks) : capacity_(capacity_blocks) {}

Pba BlockStore::allocate() {
    if (capacity_ != 0 && occupied_ >= capacity_) throw IntegrityError("store full");
    Pba pba;
    if (!free_list_.empty()) {
        pba = *free_list_.begin();
        free_list_.erase(free_list_.begin());
    } else {
        pba = next_pba_++;
    }
    ++occupied_;
    peak_ = std::max(peak_, occupied_);
    return pba;
}

void BlockStore::add_block(const Fingerprint& fp, Pba pba) {
    auto [it, inserted] = blocks_.emplace(pba, Block{fp, 0});
    if (!inserted) throw IntegrityError("PBA " + std::to_string(pba) + " already holds a block");
    table_[fp].insert(pba);
}

void BlockStore::ref(Pba pba) {
    auto it = blocks_.find(pba);
    if (it == blocks_.end()) throw IntegrityError("ref on dead PBA " + std::to_string(pba));
    ++it->second.refs;
}

void BlockStore::unref(Pba pba) {
    auto it = blocks_.find(pba);
    if (it == blocks_.end()) throw IntegrityError("unref on dead PBA " + std::to_string(pba));
    if (it->second.refs == 0) throw IntegrityError("refcount underflow on PBA " + std::to_string(pba));
    if (--it->second.refs == 0) {
        auto t = table_.find(it->second.fp);
        t->second.erase(pba);
        if (t->second.empty()) table_.erase(t);
        blocks_.erase(it);
        dead_.push_back(pba);
    }
}

uint64_t BlockStore::refcount(Pba pba) const {
    auto it = blocks_.find(pba);
    return it == blocks_.end() ? 0 : it->second.refs;
}

const Fingerprint& BlockStore::fingerprint_of(Pba pba) const {
    auto it = blocks_.find(pba);
    if (it == blocks_.end())
        throw IntegrityError("fingerprint_of on dead PBA " + std::to_string(pba));
    return it->second.fp;
}

std::vector<Pba> BlockStore::pbas_of(const Fingerprint& fp) const {
    auto it = table_.find(fp);
    if (it == table_.end()) return {};
    return {it->second.begin(), it->second.end()};
}

std::vector<Fingerprint> BlockStore::duplicate_fingerprints() const {
    std::vector<Fingerprint> out;
    for (const auto& [fp, pbas] : table_)
        if (pbas.size() > 1) out.push_back(fp);
    return out;
}

uint64_t BlockStore::collect_garbage() {
    uint64_t freed = dead_.size();
    for (Pba pba : dead_) free_list_.insert(pba);
    occupied_ -= freed;
    dead_.clear();
    return freed;
}

void BlockStore::check_integrity() const {
    uint64_t counted = 0;
    for (const auto& [fp, pbas] : table_) {
        if (pbas.empty()) throw IntegrityError("empty PBA set in fingerprint table");
        for (Pba pba : pbas) {
            auto it = blocks_.find(pba);
            if (it == blocks_.end())
                throw IntegrityError("fingerprint table references dead PBA " +
                                     std::to_string(pba));
            if (!(it->second.fp == fp))
                throw IntegrityError("fingerprint mismatch at PBA " + std::to_string(pba));
            if (it->second.refs == 0)
                throw IntegrityError("zero-ref PBA " + std::to_string(pba) +
                                     " still in the fingerprint table");
            ++counted;
        }
    }
    if (counted != blocks_.size())
        throw IntegrityError("fingerprint table covers " + std::to_string(counted) +
                             " blocks, store holds " + std::to_string(blocks_.size()));
    if (occupied_ != blocks_.size() + dead_.size())
        throw IntegrityError("occupied-block accounting drifted");
}

// ---------------------------------------------------------------------------

std::optional<Pba> LbaMapping::lookup(StreamId stream, Lba lba) const {
    auto it = map_.find(key_of(stream, lba));
    if (it == map_.end()) return std::nullopt;
    return it->second;
}

void LbaMapping::set(StreamId stream, Lba lba, Pba pba, BlockStore& store) {
    uint64_t key = key_of(stream, lba);
    auto [it, inserted] = map_.emplace(key, pba);
    if (!inserted) {
        if (it->second == pba) return;
        reverse_remove(it->second, stream, lba);
        store.unref(it->second);
        it->second = pba;
    }
    reverse_[pba].emplace_back(stream, lba);
    store.ref(pba);
}

const std::vector<std::pair<StreamId, Lba>>& LbaMapping::refs_of(Pba pba) const {
    static const std::vector<std::pair<StreamId, Lba>> kEmpty;
    auto it = reverse_.find(pba);
    return it == reverse_.end() ? kEmpty : it->second;
}

void LbaMapping::reverse_remove(Pba pba, StreamId s, Lba lba) {
    auto it = reverse_.find(pba);
    if (it == reverse_.end()) return;
    auto& v = it->second;
    for (size_t i = 0; i < v.size(); ++i) {
        if (v[i].first == s && v[i].second == lba) {
            v[i] = v.back();
            v.pop_back();
            break;
        }
    }
    if (v.empty()) reverse_.erase(it);
}

}  // namespace dedup
