#include "reservoir.hpp"

#include <cassert>

namespace dedup {

ReservoirSample::ReservoirSample(size_t capacity) : capacity_(capacity) {
    slots_.reserve(capacity);
}

void ReservoirSample::reset(size_t capacity) {
    capacity_ = capacity;
    seen_ = 0;
    slots_.clear();
    slots_.reserve(capacity);
    counts_.clear();
}

void ReservoirSample::add(const Key& k) { ++counts_[k]; }

void ReservoirSample::drop(const Key& k) {
    auto it = counts_.find(k);
    assert(it != counts_.end());
    if (--it->second == 0) counts_.erase(it);
}

void ReservoirSample::offer(StreamId stream, const Fingerprint& fp, Rng& rng) {
    ++seen_;
    Key k{stream, fp};
    if (slots_.size() < capacity_) {
        slots_.push_back(k);
        add(k);
        return;
    }
    if (capacity_ == 0) return;
    uint64_t j = rng.uniform(seen_);
    if (j < capacity_) {
        drop(slots_[j]);
        slots_[j] = k;
        add(k);
    }
}

uint64_t ReservoirSample::count_of(StreamId stream, const Fingerprint& fp) const {
    auto it = counts_.find(Key{stream, fp});
    return it == counts_.end() ? 0 : it->second;
}

FrequencyHistogram ReservoirSample::ffh_for_stream(StreamId stream) const {
    FrequencyHistogram h;
    for (const auto& [k, c] : counts_)
        if (k.stream == stream) ++h.f[c];
    return h;
}

FrequencyHistogram ReservoirSample::ffh_all() const {
    FrequencyHistogram h;
    for (const auto& [k, c] : counts_) ++h.f[c];
    return h;
}

}  // namespace dedup
