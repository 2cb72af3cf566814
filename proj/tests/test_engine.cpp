#include <doctest.h>

#include <sstream>

#include "engine.hpp"
#include "errors.hpp"
#include "idedup_reference.hpp"
#include "oracle.hpp"
#include "workload.hpp"

using namespace dedup;

namespace {

Fingerprint fp(uint64_t v) { return Fingerprint::from_u64(v); }

TraceRecord wrec(StreamId s, Lba lba, uint64_t fpv, uint64_t ts = 0) {
    TraceRecord r;
    r.timestamp_ns = ts;
    r.stream = s;
    r.op = Op::Write;
    r.lba = lba;
    r.fingerprint = fp(fpv);
    return r;
}

TraceRecord rrec(StreamId s, Lba lba, uint64_t ts = 0) {
    TraceRecord r;
    r.timestamp_ns = ts;
    r.stream = s;
    r.op = Op::Read;
    r.lba = lba;
    return r;
}

TraceHeader header_for(uint32_t streams) {
    TraceHeader h;
    h.stream_count = streams;
    return h;
}

EngineConfig small_config(EngineMode mode, uint32_t fixed_t = 0) {
    EngineConfig cfg;
    cfg.mode = mode;
    cfg.cache_entries = 64;
    cfg.fixed_threshold = fixed_t;
    cfg.seed = 5;
    return cfg;
}

}  // namespace

TEST_CASE("first write allocates, maps and sets refcount one") {
    Engine eng(small_config(EngineMode::Hpdedup), header_for(1));
    CHECK(eng.handle_write(wrec(0, 9, 1)) == WriteOutcome::WrittenNew);
    auto pba = eng.lba_map().lookup(0, 9);
    REQUIRE(pba.has_value());
    CHECK(eng.store().refcount(*pba) == 1);
    CHECK(eng.store().fingerprint_of(*pba) == fp(1));
    CHECK(eng.written_new() == 1);
}

TEST_CASE("a cached fingerprint buffers into the pending run") {
    Engine eng(small_config(EngineMode::Hpdedup), header_for(1));
    eng.handle_write(wrec(0, 0, 1));
    CHECK(eng.handle_write(wrec(0, 1, 1)) == WriteOutcome::Buffered);
}

TEST_CASE("rewriting the same content in place is a duplicate write, nothing done") {
    Engine eng(small_config(EngineMode::Hpdedup), header_for(1));
    eng.handle_write(wrec(0, 9, 1));
    uint64_t live = eng.store().live_blocks();
    CHECK(eng.handle_write(wrec(0, 9, 1)) == WriteOutcome::InlineDeduped);
    CHECK(eng.store().live_blocks() == live);  // no new block
    CHECK(eng.rewrite_nops() == 1);
    auto pba = eng.lba_map().lookup(0, 9);
    CHECK(eng.store().refcount(*pba) == 1);  // no new mapping entry either
}

TEST_CASE("runs at or above the threshold dedup, short runs materialize") {
    SUBCASE("run of five against T=4 dedups with refcount increments") {
        Engine eng(small_config(EngineMode::Hpdedup, 4), header_for(1));
        eng.handle_write(wrec(0, 0, 42));
        Pba base = *eng.lba_map().lookup(0, 0);
        for (Lba l = 100; l < 105; ++l) eng.handle_write(wrec(0, l, 42));
        eng.finish();
        CHECK(eng.inline_deduped() == 5);
        CHECK(eng.store().refcount(base) == 6);  // own mapping plus five dedups
        CHECK(eng.store().live_blocks() == 1);
    }
    SUBCASE("run of two against T=4 materializes two new blocks") {
        Engine eng(small_config(EngineMode::Hpdedup, 4), header_for(1));
        eng.handle_write(wrec(0, 0, 42));
        eng.handle_write(wrec(0, 100, 42));
        eng.handle_write(wrec(0, 101, 42));
        eng.finish();
        CHECK(eng.materialized() == 2);
        CHECK(eng.inline_deduped() == 0);
        CHECK(eng.store().live_blocks() == 3);
        // a non-contiguous hit flushes the previous run first
    }
    SUBCASE("non-contiguous hit closes the open run") {
        Engine eng(small_config(EngineMode::Hpdedup, 2), header_for(1));
        eng.handle_write(wrec(0, 0, 7));
        eng.handle_write(wrec(0, 10, 7));
        eng.handle_write(wrec(0, 50, 7));  // breaks contiguity: run of 1 materializes
        eng.finish();
        CHECK(eng.materialized() == 1);
    }
}

TEST_CASE("with T=1 every cache hit is deduped, matching the threshold-free oracle") {
    StreamProfile p = profile_preset("fiu-web");
    p.request_count = 6000;
    auto recs = generate_stream(p, 3);

    EngineConfig cfg = small_config(EngineMode::IdedupBaseline, 1);
    cfg.cache_entries = 512;
    Engine eng(cfg, header_for(1));
    testref::IDedupReference ref(512, 1);
    for (const auto& r : recs) {
        eng.handle(r);
        ref.handle(r);
    }
    eng.finish();
    ref.finish();
    CHECK(eng.inline_deduped() == ref.deduped());
    CHECK(eng.inline_deduped() == eng.cache().total_hits() + eng.rewrite_nops());
}

TEST_CASE("reads resolve mapped LBAs and count unmapped ones") {
    Engine eng(small_config(EngineMode::Hpdedup), header_for(1));
    eng.handle_write(wrec(0, 5, 1));
    CHECK(eng.handle_read(rrec(0, 5)) == ReadOutcome::Resolved);
    CHECK(eng.handle_read(rrec(0, 999)) == ReadOutcome::Unmapped);
    CHECK(eng.unmapped_reads() == 1);
}

TEST_CASE("sequential reads record one run at the break") {
    Engine eng(small_config(EngineMode::Hpdedup), header_for(1));
    eng.handle_read(rrec(0, 10));
    eng.handle_read(rrec(0, 11));
    eng.handle_read(rrec(0, 12));
    eng.handle_read(rrec(0, 50));  // jump closes the run of 3
    const ThresholdState* st = eng.threshold_state_of(0);
    REQUIRE(st != nullptr);
    CHECK(st->read_run_count(3) == 1);
    eng.finish();  // closes the trailing singleton
    CHECK(st->read_run_count(1) == 1);
}

TEST_CASE("interleaved streams do not merge read runs") {
    Engine eng(small_config(EngineMode::Hpdedup), header_for(2));
    // stream 0 reads 10,11,12 while stream 1 reads 11,12,13 interleaved
    eng.handle_read(rrec(0, 10));
    eng.handle_read(rrec(1, 11));
    eng.handle_read(rrec(0, 11));
    eng.handle_read(rrec(1, 12));
    eng.handle_read(rrec(0, 12));
    eng.handle_read(rrec(1, 13));
    eng.finish();
    CHECK(eng.threshold_state_of(0)->read_run_count(3) == 1);
    CHECK(eng.threshold_state_of(1)->read_run_count(3) == 1);
}

TEST_CASE("a write run survives an in-order read but flushes on a stray one") {
    Engine eng(small_config(EngineMode::Hpdedup, 3), header_for(1));
    eng.handle_write(wrec(0, 0, 9));
    eng.handle_write(wrec(0, 100, 9));
    eng.handle_write(wrec(0, 101, 9));
    eng.handle_read(rrec(0, 102));  // contiguous with the run: stays open
    eng.handle_write(wrec(0, 102, 9));
    eng.finish();
    CHECK(eng.inline_deduped() == 3);  // run of 3 met T=3

    Engine eng2(small_config(EngineMode::Hpdedup, 3), header_for(1));
    eng2.handle_write(wrec(0, 0, 9));
    eng2.handle_write(wrec(0, 100, 9));
    eng2.handle_write(wrec(0, 101, 9));
    eng2.handle_read(rrec(0, 999));  // stray read flushes the run of 2
    eng2.handle_write(wrec(0, 102, 9));
    eng2.finish();
    CHECK(eng2.materialized() == 2);
}

TEST_CASE("conservation: every write is new, deduped or materialized") {
    auto recs = mix_streams(mix_preset("workload-B", 0.05), 17);
    EngineConfig cfg;
    cfg.mode = EngineMode::Hpdedup;
    cfg.cache_entries = 1024;
    cfg.seed = 17;
    TraceHeader h = header_for(4);
    Engine eng(cfg, h);
    for (const auto& r : recs) eng.handle(r);
    eng.finish();
    CHECK(eng.written_new() + eng.inline_deduped() + eng.materialized() == eng.total_writes());
    eng.postprocess();
    eng.check_integrity();
}

TEST_CASE("interval end logs estimates for all active streams") {
    EngineConfig cfg;
    cfg.mode = EngineMode::Hpdedup;
    cfg.cache_entries = 200;  // first interval after 100 writes
    cfg.eif = 0.5;
    cfg.seed = 3;
    Engine eng(cfg, header_for(2));
    uint64_t fpv = 1;
    for (int i = 0; i < 100; ++i) {
        eng.handle_write(wrec(0, 1000 + i, fpv));
        fpv += (i % 2);  // every other write repeats the previous fingerprint
    }
    // stream 1 appears after the first interval: StreamChange fires next
    CHECK(eng.interval_index() >= 1);
    auto est_rows = eng.timeline().estimates;
    bool saw0 = false;
    for (const auto& r : est_rows) saw0 |= (r.stream == 0 && r.n_i > 0);
    CHECK(saw0);

    uint64_t before = eng.interval_index();
    eng.handle_write(wrec(1, 1, 999999));
    CHECK(eng.interval_index() == before + 1);  // stream join triggered estimation
}

TEST_CASE("check_triggers reports interval end and stream joins") {
    EngineConfig cfg;
    cfg.mode = EngineMode::Hpdedup;
    cfg.cache_entries = 1 << 20;  // interval far away
    cfg.seed = 1;
    Engine eng(cfg, header_for(3));
    CHECK(eng.check_triggers() == kTriggerNone);
    eng.handle_write(wrec(0, 0, 1));  // new stream fired StreamChange inside handle
    CHECK(eng.check_triggers() == kTriggerNone);  // consumed by the early estimation
}

TEST_CASE("weights shift when a stream's LDSS moves an order of magnitude") {
    EngineConfig cfg;
    cfg.mode = EngineMode::Hpdedup;
    cfg.cache_entries = 2000;  // interval 1000
    cfg.seed = 9;
    Engine eng(cfg, header_for(2));
    // interval 1: stream 0 all duplicates, stream 1 all unique
    uint64_t u = 1000000;
    for (int i = 0; i < 500; ++i) {
        eng.handle_write(wrec(0, i, 1 + (i % 5)));
        eng.handle_write(wrec(1, i, u++));
    }
    double share_dup = eng.weights().share(0);
    double share_uni = eng.weights().share(1);
    CHECK(share_dup < share_uni);  // high LDSS means low eviction priority

    // interval 2: stream 0 turns all-unique too; its share must rise
    for (int i = 0; i < 500; ++i) {
        eng.handle_write(wrec(0, 5000 + i, u++));
        eng.handle_write(wrec(1, 5000 + i, u++));
    }
    CHECK(eng.weights().share(0) > share_dup);
}

TEST_CASE("baseline modes never invoke the estimator") {
    for (EngineMode mode :
         {EngineMode::IdedupBaseline, EngineMode::PostprocessOnly, EngineMode::DiodeGate}) {
        auto recs = mix_streams(mix_preset("workload-A", 0.02), 4);
        EngineConfig cfg;
        cfg.mode = mode;
        cfg.cache_entries = 500;
        cfg.seed = 4;
        TraceHeader h = header_for(4);
        Engine eng(cfg, h);
        for (const auto& r : recs) eng.handle(r);
        eng.finish();
        CHECK(eng.estimator_invocations() == 0);
    }
}

TEST_CASE("postprocess-only mode performs no inline dedup yet ends exact") {
    auto recs = mix_streams(mix_preset("workload-A", 0.02), 8);
    EngineConfig cfg;
    cfg.mode = EngineMode::PostprocessOnly;
    cfg.cache_entries = 500;
    cfg.seed = 8;
    Engine eng(cfg, header_for(4));
    OracleIndex oracle;
    for (const auto& r : recs) {
        oracle.note(r);
        eng.handle(r);
    }
    eng.finish();
    CHECK(eng.inline_deduped() == 0);
    CHECK(eng.cache().total_hits() + eng.cache().total_misses() == 0);
    eng.postprocess();
    CHECK(eng.store().live_blocks() == oracle.distinct_fingerprints());
}

TEST_CASE("diode gate skips inline dedup for P-type streams") {
    TraceHeader h = header_for(2);
    h.types = {StreamType::PType, StreamType::Unknown};
    EngineConfig cfg;
    cfg.mode = EngineMode::DiodeGate;
    cfg.cache_entries = 256;
    cfg.seed = 2;
    Engine eng(cfg, h);
    for (int i = 0; i < 50; ++i) {
        eng.handle_write(wrec(0, i, 7));       // P-type: bypasses the cache entirely
        eng.handle_write(wrec(1, i, 100 + i));  // U-type: normal inline path
    }
    eng.finish();
    const auto& gated = eng.cache().stream_stats(0);
    CHECK(gated.hits + gated.misses == 0);
    CHECK(eng.stream_counters().at(0).written_new == 50);
    const auto& open = eng.cache().stream_stats(1);
    CHECK(open.misses == 50);
}

TEST_CASE("store-full surfaces as an integrity error") {
    EngineConfig cfg = small_config(EngineMode::PostprocessOnly);
    cfg.store_capacity = 3;
    Engine eng(cfg, header_for(1));
    eng.handle_write(wrec(0, 0, 1));
    eng.handle_write(wrec(0, 1, 2));
    eng.handle_write(wrec(0, 2, 3));
    CHECK_THROWS_AS(eng.handle_write(wrec(0, 3, 4)), IntegrityError);
}

TEST_CASE("mixed replay rejects the weak-locality stream more than the strong one") {
    auto recs = mix_streams(mix_preset("workload-C", 0.35), 6);
    EngineConfig cfg;
    cfg.mode = EngineMode::Hpdedup;
    cfg.cache_entries = 2500;
    cfg.fixed_threshold = 4;
    cfg.seed = 6;
    Engine eng(cfg, header_for(5));
    for (const auto& r : recs) eng.handle(r);
    eng.finish();
    // stream 0 = mail-like (L), streams 3,4 = ftp-like (NL)
    const auto& mail = eng.cache().stream_stats(0);
    const auto& ftp = eng.cache().stream_stats(3);
    double mail_rej = mail.misses ? double(mail.rejections) / double(mail.misses) : 0.0;
    double ftp_rej = ftp.misses ? double(ftp.rejections) / double(ftp.misses) : 0.0;
    CHECK(ftp_rej > mail_rej);
}

TEST_CASE("baseline engine outcome sequence is bit-identical to the reference") {
    for (uint64_t seed = 1; seed <= 5; ++seed) {
        auto recs = mix_streams(mix_preset("workload-B", 0.04), seed);
        EngineConfig cfg;
        cfg.mode = EngineMode::IdedupBaseline;
        cfg.cache_entries = 700;
        cfg.fixed_threshold = 4;
        cfg.seed = seed;
        std::ostringstream log;
        cfg.event_log = &log;
        Engine eng(cfg, header_for(4));
        testref::IDedupReference ref(700, 4);
        for (const auto& r : recs) {
            eng.handle(r);
            ref.handle(r);
        }
        eng.finish();
        ref.finish();
        REQUIRE(log.str() == ref.log());
        CHECK(eng.inline_deduped() == ref.deduped());
    }
}

TEST_CASE("referential integrity holds after arbitrary replays and passes") {
    auto recs = mix_streams(mix_preset("workload-C", 0.05), 12);
    EngineConfig cfg;
    cfg.mode = EngineMode::Hpdedup;
    cfg.cache_entries = 1200;
    cfg.seed = 12;
    Engine eng(cfg, header_for(5));
    size_t i = 0;
    for (const auto& r : recs) {
        eng.handle(r);
        if (++i % 7000 == 0) eng.postprocess();  // interleave passes mid-run
    }
    eng.finish();
    eng.postprocess();
    eng.check_integrity();
    // no inline false dedup: every mapping's block carries the written content
    OracleIndex oracle;
    for (const auto& r : recs) oracle.note(r);
    bool all_match = true;
    oracle.for_each_last_write([&](StreamId s, Lba lba, const Fingerprint& want) {
        auto pba = eng.lba_map().lookup(s, lba);
        if (!pba || !(eng.store().fingerprint_of(*pba) == want)) all_match = false;
    });
    CHECK(all_match);
}
