#include "engine.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <ostream>

#include "errors.hpp"

namespace dedup {

const char* mode_name(EngineMode mode) {
    switch (mode) {
        case EngineMode::Hpdedup: return "hpdedup";
        case EngineMode::IdedupBaseline: return "idedup-baseline";
        case EngineMode::PostprocessOnly: return "postprocess-only";
        case EngineMode::DiodeGate: return "diode-gate";
    }
    return "?";
}

EngineMode mode_from_name(const std::string& name) {
    std::string n;
    for (char c : name) n.push_back(c == '_' ? '-' : static_cast<char>(std::tolower(c)));
    if (n == "hpdedup") return EngineMode::Hpdedup;
    if (n == "idedup-baseline" || n == "idedup") return EngineMode::IdedupBaseline;
    if (n == "postprocess-only" || n == "postprocess") return EngineMode::PostprocessOnly;
    if (n == "diode-gate" || n == "diode") return EngineMode::DiodeGate;
    throw ConfigError("unknown mode '" + name + "'");
}

void DataBufferModel::touch(const Fingerprint& fp) {
    auto it = index_.find(fp);
    if (it != index_.end()) {
        ++hits_;
        lru_.splice(lru_.begin(), lru_, it->second);
        return;
    }
    ++misses_;
    lru_.push_front(fp);
    index_[fp] = lru_.begin();
    if (index_.size() > capacity_) {
        index_.erase(lru_.back());
        lru_.pop_back();
    }
}

namespace {

CacheConfig cache_config_for(const EngineConfig& cfg) {
    CacheConfig cc;
    cc.capacity = cfg.cache_entries;
    cc.policy = cfg.policy;
    cc.mode = cfg.mode == EngineMode::Hpdedup ? CacheMode::LdssPrioritized
                                              : CacheMode::GlobalBaseline;
    cc.admission_epsilon = cfg.admission_epsilon;
    return cc;
}

}  // namespace

Engine::Engine(const EngineConfig& cfg, const TraceHeader& header)
    : cfg_(cfg),
      header_(header),
      cache_(cache_config_for(cfg)),
      store_(cfg.store_capacity),
      reservoir_(0),
      rng_(derive_seed(cfg.seed, 0xE1)),
      buffer_(cfg.data_buffer_blocks) {
    if (cfg.sample_rate <= 0.0 || cfg.sample_rate > 1.0)
        throw ConfigError("sample rate must be in (0, 1]");
    if (cfg.eif > 1.0) throw ConfigError("estimation interval factor must be in (0, 1]");
    if (cfg.mode == EngineMode::IdedupBaseline && cfg.fixed_threshold == 0)
        cfg_.fixed_threshold = 4;  // the iDedup comparison point
    eif_ = cfg_.eif > 0 ? cfg_.eif : 0.5;
    interval_clock_on_ = cfg_.mode == EngineMode::Hpdedup ||
                         (cfg_.mode == EngineMode::DiodeGate && thresholds_adaptive());
    shared_threshold_.set_threshold(cfg_.initial_threshold);
    reset_interval_clock();
}

bool Engine::inline_enabled(StreamId s) const {
    switch (cfg_.mode) {
        case EngineMode::PostprocessOnly:
            return false;
        case EngineMode::DiodeGate:
            return header_.type_of(s) != StreamType::PType;
        default:
            return true;
    }
}

bool Engine::thresholds_adaptive() const {
    if (cfg_.fixed_threshold > 0) return false;
    return cfg_.mode == EngineMode::Hpdedup || cfg_.mode == EngineMode::DiodeGate;
}

Engine::StreamState& Engine::state_for(StreamId s) {
    auto it = streams_.find(s);
    if (it == streams_.end()) {
        it = streams_.emplace(s, StreamState{}).first;
        it->second.threshold.set_threshold(cfg_.initial_threshold);
        stream_joined_ = true;
    }
    return it->second;
}

ThresholdState& Engine::threshold_state(StreamId s, StreamState& st) {
    (void)s;
    return cfg_.mode == EngineMode::DiodeGate ? shared_threshold_ : st.threshold;
}

uint32_t Engine::effective_threshold(StreamId, StreamState& st) const {
    if (cfg_.fixed_threshold > 0) return cfg_.fixed_threshold;
    return cfg_.mode == EngineMode::DiodeGate ? shared_threshold_.threshold()
                                              : st.threshold.threshold();
}

uint32_t Engine::threshold_of(StreamId s) const {
    auto it = streams_.find(s);
    if (cfg_.fixed_threshold > 0) return cfg_.fixed_threshold;
    if (cfg_.mode == EngineMode::DiodeGate) return shared_threshold_.threshold();
    return it == streams_.end() ? cfg_.initial_threshold : it->second.threshold.threshold();
}

const ThresholdState* Engine::threshold_state_of(StreamId s) const {
    if (cfg_.mode == EngineMode::DiodeGate) return &shared_threshold_;
    auto it = streams_.find(s);
    return it == streams_.end() ? nullptr : &it->second.threshold;
}

double Engine::predicted_ldss_of(StreamId s) const {
    auto it = streams_.find(s);
    return it == streams_.end() ? -1.0 : it->second.predicted_ldss;
}

void Engine::log_event(const char* kind, StreamId s, uint64_t a, const char* tag) {
    if (cfg_.event_log) (*cfg_.event_log) << kind << ',' << s << ',' << a << ',' << tag << '\n';
}

void Engine::note_window_write(bool deduped) {
    if (!interval_clock_on_) return;
    ++window_writes_;
    if (deduped) ++window_deduped_;
    if (window_writes_ >= window_len_) {
        double cur = static_cast<double>(window_deduped_) / static_cast<double>(window_writes_);
        if (prev_window_ratio_ >= 0.0 && cur < kRatioDropFactor * prev_window_ratio_)
            ratio_drop_flag_ = true;
        prev_window_ratio_ = cur;
        window_writes_ = 0;
        window_deduped_ = 0;
    }
}

uint32_t Engine::check_triggers() const {
    if (!interval_clock_on_) return kTriggerNone;
    uint32_t t = kTriggerNone;
    if (interval_write_count_ >= interval_len_) t |= kTriggerIntervalEnd;
    if (ratio_drop_flag_) t |= kTriggerDedupRatioDrop;
    if (stream_joined_) t |= kTriggerStreamChange;
    return t;
}

Pba Engine::write_new_block(const TraceRecord& rec) {
    Pba pba = store_.allocate();
    store_.add_block(rec.fingerprint, pba);
    lba_.set(rec.stream, rec.lba, pba, store_);
    return pba;
}

void Engine::flush_run(StreamId s, StreamState& st) {
    if (st.run.empty()) return;
    const uint64_t len = st.run.size();
    const uint32_t t = effective_threshold(s, st);
    bool dedup = len >= t;
    if (dedup) {
        for (const auto& e : st.run) {
            // content safety: the matched block must still be live and carry
            // the same fingerprint (it may have died to an overwrite)
            if (store_.is_live(e.matched) && store_.fingerprint_of(e.matched) == e.fp) {
                lba_.set(s, e.lba, e.matched, store_);
                ++inline_deduped_;
                ++per_stream_[s].inline_deduped;
                note_window_write(true);
            } else {
                TraceRecord rec;
                rec.stream = s;
                rec.lba = e.lba;
                rec.fingerprint = e.fp;
                Pba pba = write_new_block(rec);
                cache_.rebind(e.fp, pba);
                ++written_new_;
                ++per_stream_[s].written_new;
                note_window_write(false);
            }
        }
    } else {
        for (const auto& e : st.run) {
            TraceRecord rec;
            rec.stream = s;
            rec.lba = e.lba;
            rec.fingerprint = e.fp;
            write_new_block(rec);
            ++materialized_;
            ++per_stream_[s].materialized;
            note_window_write(false);
        }
    }
    threshold_state(s, st).record_write_run(len);
    log_event("flush", s, len, dedup ? "dedup" : "mat");
    st.run.clear();
}

void Engine::close_read_run(StreamId s, StreamState& st) {
    if (!st.read_run_open) return;
    threshold_state(s, st).record_read_run(st.read_run_len);
    st.read_run_open = false;
    st.read_run_len = 0;
}

WriteOutcome Engine::handle_write(const TraceRecord& rec) {
    StreamState& st = state_for(rec.stream);
    ++total_writes_;
    ++per_stream_[rec.stream].writes;

    WriteOutcome outcome;
    if (!inline_enabled(rec.stream)) {
        write_new_block(rec);
        ++written_new_;
        ++per_stream_[rec.stream].written_new;
        buffer_.touch(rec.fingerprint);
        log_event("w", rec.stream, rec.lba, "new");
        outcome = WriteOutcome::WrittenNew;
    } else {
        threshold_state(rec.stream, st).note_write();
        // a non-contiguous request from this stream closes its open read run
        if (st.read_run_open && rec.lba != st.last_read_lba + 1) close_read_run(rec.stream, st);

        if (estimator_enabled()) {
            reservoir_.offer(rec.stream, rec.fingerprint, rng_);
            ++st.interval_writes;
            ++st.interval_fps[rec.fingerprint];
            ++interval_write_count_;
        } else if (interval_clock_on_) {
            ++st.interval_writes;
            ++interval_write_count_;
        }

        auto mapped = lba_.lookup(rec.stream, rec.lba);
        if (mapped && store_.is_live(*mapped) && store_.fingerprint_of(*mapped) == rec.fingerprint) {
            // same content rewritten in place: a duplicate write, nothing to do
            flush_run(rec.stream, st);
            ++inline_deduped_;
            ++rewrite_nops_;
            ++per_stream_[rec.stream].inline_deduped;
            ++per_stream_[rec.stream].rewrite_nops;
            note_window_write(true);
            buffer_.touch(rec.fingerprint);
            log_event("w", rec.stream, rec.lba, "nop");
            outcome = WriteOutcome::InlineDeduped;
        } else if (auto hit = cache_.lookup(rec.fingerprint, rec.stream)) {
            if (!st.run.empty() && rec.lba != st.run.back().lba + 1) flush_run(rec.stream, st);
            st.run.push_back({rec.lba, rec.fingerprint, *hit});
            if (st.run.size() >= kRunCap) flush_run(rec.stream, st);
            buffer_.touch(rec.fingerprint);
            log_event("w", rec.stream, rec.lba, "buf");
            outcome = WriteOutcome::Buffered;
        } else {
            flush_run(rec.stream, st);
            Pba pba = write_new_block(rec);
            ++written_new_;
            ++per_stream_[rec.stream].written_new;
            note_window_write(false);
            cache_.admit(rec.fingerprint, pba, rec.stream, weights_, rng_);
            buffer_.touch(rec.fingerprint);
            log_event("w", rec.stream, rec.lba, "new");
            outcome = WriteOutcome::WrittenNew;
        }
    }

    if (uint32_t t = check_triggers()) end_of_interval(t);
    return outcome;
}

ReadOutcome Engine::handle_read(const TraceRecord& rec) {
    StreamState& st = state_for(rec.stream);
    ++total_reads_;
    ++per_stream_[rec.stream].reads;

    if (inline_enabled(rec.stream)) {
        threshold_state(rec.stream, st).note_read();
        if (!st.run.empty() && rec.lba != st.run.back().lba + 1) flush_run(rec.stream, st);
        if (st.read_run_open && rec.lba == st.last_read_lba + 1) {
            ++st.read_run_len;
        } else {
            close_read_run(rec.stream, st);
            st.read_run_open = true;
            st.read_run_len = 1;
        }
        st.last_read_lba = rec.lba;
    }

    ReadOutcome outcome;
    auto mapped = lba_.lookup(rec.stream, rec.lba);
    if (mapped) {
        buffer_.touch(store_.fingerprint_of(*mapped));
        outcome = ReadOutcome::Resolved;
    } else {
        ++unmapped_reads_;
        ++per_stream_[rec.stream].unmapped_reads;
        outcome = ReadOutcome::Unmapped;
    }

    if (uint32_t t = check_triggers()) end_of_interval(t);
    return outcome;
}

void Engine::handle(const TraceRecord& rec) {
    if (rec.is_write())
        handle_write(rec);
    else
        handle_read(rec);
}

void Engine::finish() {
    for (auto& [s, st] : streams_) {
        flush_run(s, st);
        close_read_run(s, st);
    }
}

void Engine::reset_interval_clock() {
    interval_len_ = std::max<uint64_t>(
        1, static_cast<uint64_t>(std::llround(eif_ * static_cast<double>(cfg_.cache_entries))));
    window_len_ = std::max<uint64_t>(1, interval_len_ / 4);
    window_writes_ = 0;
    window_deduped_ = 0;
    interval_write_count_ = 0;
    if (estimator_enabled()) {
        reservoir_.reset(std::max<size_t>(
            1, static_cast<size_t>(std::llround(cfg_.sample_rate * static_cast<double>(interval_len_)))));
    }
}

void Engine::end_of_interval(uint32_t triggers) {
    (void)triggers;
    for (auto& [s, st] : streams_) flush_run(s, st);

    const double d = inline_hit_fraction();

    if (estimator_enabled()) {
        ++estimator_invocations_;
        const double p_eff = reservoir_.effective_rate();
        std::vector<StreamIntervalInput> inputs;
        for (auto& [s, st] : streams_)
            inputs.push_back({s, reservoir_.ffh_for_stream(s), st.interval_writes});
        UnseenParams params;
        params.ldss_floor = kLdssFloor;
        auto results = estimate_all(inputs, interval_index_, interval_len_, p_eff, params);

        std::vector<std::pair<StreamId, double>> predictions;
        for (size_t i = 0; i < results.size(); ++i) {
            StreamId s = inputs[i].stream;
            StreamState& st = streams_.at(s);
            if (results[i].estimate) {
                const LdssEstimate& est = *results[i].estimate;
                double predicted = st.smoother.update(est.ldss);
                st.predicted_ldss = std::max(kLdssFloor, predicted);
                double oracle =
                    static_cast<double>(st.interval_writes) - static_cast<double>(st.interval_fps.size());
                timeline_.estimates.push_back({interval_index_, s, est.writes, est.unique_writes,
                                               est.ldss, st.predicted_ldss, est.lp_ms, oracle,
                                               est.bypassed});
            } else {
                ++estimate_errors_;
                if (st.predicted_ldss < kLdssFloor) st.predicted_ldss = kLdssFloor;
            }
            predictions.emplace_back(s, st.predicted_ldss);
        }
        weights_ = EvictionWeights::from_predictions(predictions);
    }

    if (thresholds_adaptive()) {
        if (cfg_.mode == EngineMode::DiodeGate) {
            shared_threshold_.maybe_reset(d);
            shared_threshold_.update_threshold(d);
            for (auto& [s, st] : streams_) {
                if (!inline_enabled(s)) continue;
                timeline_.thresholds.push_back({total_writes_, s, shared_threshold_.threshold(),
                                                shared_threshold_.mean_write_run(),
                                                shared_threshold_.mean_read_run(),
                                                shared_threshold_.read_ratio()});
            }
        } else {
            for (auto& [s, st] : streams_) {
                st.threshold.maybe_reset(d);
                st.threshold.update_threshold(d);
                timeline_.thresholds.push_back({total_writes_, s, st.threshold.threshold(),
                                                st.threshold.mean_write_run(),
                                                st.threshold.mean_read_run(),
                                                st.threshold.read_ratio()});
            }
        }
    }

    const auto occ = cache_.occupancy();
    for (auto& [s, st] : streams_) {
        const auto& cs = cache_.stream_stats(s);
        auto it = occ.find(s);
        timeline_.occupancy.push_back({interval_index_, s,
                                       it == occ.end() ? 0 : static_cast<uint64_t>(it->second),
                                       cs.hits, cs.misses, cs.rejections});
        st.interval_writes = 0;
        st.interval_fps.clear();
    }

    if (cfg_.eif <= 0.0) eif_ = std::clamp(1.0 - d, 0.1, 0.9);
    ++interval_index_;
    stream_joined_ = false;
    ratio_drop_flag_ = false;
    prev_window_ratio_ = -1.0;
    reset_interval_clock();
}

PostprocessReport Engine::postprocess() {
    for (auto& [s, st] : streams_) flush_run(s, st);
    PostprocessReport rep = run_postprocess(store_, lba_, &cache_);
    postprocess_deduped_ += rep.merges;
    pp_reports_.push_back(rep);
    return rep;
}

void Engine::check_integrity() const {
    store_.check_integrity();
    std::unordered_map<Pba, uint64_t> mapping_counts;
    lba_.for_each([&](StreamId s, Lba lba, Pba pba) {
        if (!store_.is_live(pba))
            throw IntegrityError("LBA mapping (" + std::to_string(s) + "," + std::to_string(lba) +
                                 ") points at dead PBA " + std::to_string(pba));
        ++mapping_counts[pba];
    });
    for (const auto& [pba, count] : mapping_counts) {
        if (store_.refcount(pba) != count)
            throw IntegrityError("PBA " + std::to_string(pba) + " refcount " +
                                 std::to_string(store_.refcount(pba)) + " != " +
                                 std::to_string(count) + " mappings");
    }
    if (mapping_counts.size() != store_.live_blocks() - store_.pending_dead())
        throw IntegrityError("live blocks without any LBA mapping detected");
}

}  // namespace dedup
