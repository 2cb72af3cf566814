#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "dedupsim/dedupsim.h"

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("dedupsim_capi_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

}  // namespace

TEST_CASE("preset generation and full replay through the C surface") {
    TempDir dir;
    dsim_mixspec* spec = dsim_mixspec_preset("workload-A", 0.02);
    REQUIRE(spec != nullptr);
    CHECK(dsim_mixspec_streams(spec) == 4);
    CHECK(dsim_mixspec_requests(spec, 0) > 0);

    auto trace = dir.file("a.csv");
    REQUIRE(dsim_generate(spec, 7, trace.c_str()) == DSIM_OK);
    dsim_mixspec_free(spec);

    dsim_options opts;
    dsim_options_init(&opts);
    opts.cache_entries = 400;
    opts.seed = 7;
    dsim_engine* eng = dsim_engine_create(&opts);
    REQUIRE(eng != nullptr);
    REQUIRE(dsim_engine_replay(eng, trace.c_str()) == DSIM_OK);

    double exact = 0, dups = 0, inl = 0, pp = 0;
    CHECK(dsim_engine_metric(eng, "exact_after_postprocess", &exact) == DSIM_OK);
    CHECK(exact == 1.0);
    CHECK(dsim_engine_metric(eng, "total_duplicates", &dups) == DSIM_OK);
    CHECK(dsim_engine_metric(eng, "inline_deduped", &inl) == DSIM_OK);
    CHECK(dsim_engine_metric(eng, "postprocess_deduped", &pp) == DSIM_OK);
    CHECK(inl + pp == dups);

    auto out = dir.file("report");
    REQUIRE(dsim_engine_report(eng, out.c_str()) == DSIM_OK);
    CHECK(std::filesystem::exists(out + "/summary.json"));
    CHECK(std::filesystem::exists(out + "/timeline.csv"));

    const dsim_engine* engines[] = {eng};
    REQUIRE(dsim_write_compare(engines, 1, out.c_str()) == DSIM_OK);
    CHECK(std::filesystem::exists(out + "/compare.csv"));

    dsim_engine_free(eng);
}

TEST_CASE("deterministic generation: same seed, identical bytes") {
    TempDir dir;
    dsim_mixspec* spec = dsim_mixspec_preset("fiu-web", 0.05);
    REQUIRE(spec != nullptr);
    auto t1 = dir.file("1.csv"), t2 = dir.file("2.csv");
    REQUIRE(dsim_generate(spec, 9, t1.c_str()) == DSIM_OK);
    REQUIRE(dsim_generate(spec, 9, t2.c_str()) == DSIM_OK);
    dsim_mixspec_free(spec);
    std::ifstream a(t1), b(t2);
    std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    CHECK(sa == sb);
    CHECK(!sa.empty());
}

TEST_CASE("error paths set codes and messages") {
    CHECK(dsim_mixspec_preset("no-such-preset", 1.0) == nullptr);
    CHECK(std::string(dsim_last_error()).find("no-such-preset") != std::string::npos);

    CHECK(dsim_mixspec_load("/nonexistent/mix.ini") == nullptr);

    dsim_options opts;
    dsim_options_init(&opts);
    opts.mode = "warp-drive";
    CHECK(dsim_engine_create(&opts) == nullptr);
    CHECK(std::string(dsim_last_error()).find("warp-drive") != std::string::npos);

    dsim_options_init(&opts);
    opts.cache_entries = 0;
    CHECK(dsim_engine_create(&opts) == nullptr);

    dsim_options_init(&opts);
    dsim_engine* eng = dsim_engine_create(&opts);
    REQUIRE(eng != nullptr);
    CHECK(dsim_engine_replay(eng, "/nonexistent/trace.csv") != DSIM_OK);
    double v;
    CHECK(dsim_engine_metric(eng, "inline_dedup_ratio", &v) == DSIM_ERR_CONFIG);
    dsim_engine_free(eng);

    CHECK(dsim_generate(nullptr, 0, "x") == DSIM_ERR_CONFIG);
    CHECK(dsim_oracle_stats(nullptr, 0, "x") == DSIM_ERR_CONFIG);
}

TEST_CASE("mix config files load through the C surface") {
    TempDir dir;
    auto cfg = dir.file("mix.ini");
    {
        std::ofstream out(cfg);
        out << "duration = 10\n"
               "[stream]\npreset = fiu-mail\nrequests = 500\n"
               "[stream]\npreset = cloud-ftp\nrequests = 1500\n"
               "[overlap]\n0 1 = 0.1\n";
    }
    dsim_mixspec* spec = dsim_mixspec_load(cfg.c_str());
    REQUIRE(spec != nullptr);
    CHECK(dsim_mixspec_streams(spec) == 2);
    CHECK(dsim_mixspec_requests(spec, 1) == 1500);
    auto trace = dir.file("t.csv");
    CHECK(dsim_generate(spec, 3, trace.c_str()) == DSIM_OK);
    dsim_mixspec_free(spec);

    CHECK(dsim_oracle_stats(trace.c_str(), 500, dir.file("o.json").c_str()) == DSIM_OK);
    CHECK(std::filesystem::exists(dir.file("o.json")));
}

TEST_CASE("modes accept the documented spellings") {
    for (const char* mode : {"hpdedup", "idedup-baseline", "postprocess-only", "diode-gate",
                             "HPDEDUP", "IDEDUP_BASELINE"}) {
        dsim_options opts;
        dsim_options_init(&opts);
        opts.mode = mode;
        dsim_engine* eng = dsim_engine_create(&opts);
        INFO(mode);
        CHECK(eng != nullptr);
        dsim_engine_free(eng);
    }
}
