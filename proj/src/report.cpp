#include "report.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "errors.hpp"

namespace dedup {

using nlohmann::json;

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    return out;
}

}  // namespace

std::string summary_json(const RunMetrics& m) {
    json j;
    j["config"] = {{"mode", m.mode},
                   {"trace", m.trace},
                   {"seed", m.seed},
                   {"cache_entries", m.cache_entries},
                   {"policy", m.policy},
                   {"sample_rate", m.sample_rate},
                   {"admission_epsilon", m.admission_epsilon},
                   {"initial_threshold", m.initial_threshold},
                   {"fixed_threshold", m.fixed_threshold},
                   {"pp_interval", m.pp_interval}};
    j["requests"] = {{"total", m.total_requests},
                     {"writes", m.total_writes},
                     {"reads", m.total_reads},
                     {"unmapped_reads", m.unmapped_reads}};
    j["oracle"] = {{"distinct_fingerprints", m.distinct_fingerprints},
                   {"total_duplicates", m.total_duplicates}};
    j["dedup"] = {{"inline_deduped", m.inline_deduped},
                  {"postprocess_deduped", m.postprocess_deduped},
                  {"written_new", m.written_new},
                  {"materialized", m.materialized},
                  {"rewrite_nops", m.rewrite_nops},
                  {"inline_dedup_ratio", m.inline_dedup_ratio()}};
    j["cache"] = {{"hits", m.cache_hits},
                  {"misses", m.cache_misses},
                  {"fingerprints_admitted", m.fingerprints_admitted},
                  {"rejections", m.cache_rejections},
                  {"evictions", m.cache_evictions},
                  {"average_hits", m.average_hits()}};
    j["capacity"] = {{"peak_blocks", m.peak_blocks},
                     {"live_blocks_final", m.live_blocks_final},
                     {"postprocess_passes", m.postprocess_passes},
                     {"gc_freed", m.gc_freed}};
    j["estimator"] = {{"intervals", m.estimator_intervals},
                      {"errors", m.estimate_errors},
                      {"eif_final", m.eif_final},
                      {"mean_lp_ms", m.mean_lp_ms},
                      {"mean_rel_error", m.estimator_mean_rel_error},
                      {"memory_overhead_bytes", m.memory_overhead_bytes}};
    j["data_buffer"] = {{"hits", m.buffer_hits}, {"misses", m.buffer_misses}};
    j["exactness"] = {{"exact_after_postprocess", m.exact_after_postprocess},
                      {"reads_resolve_last_write", m.reads_resolve_last_write}};
    json streams = json::object();
    for (const auto& [s, sm] : m.per_stream) {
        streams[std::to_string(s)] = {{"writes", sm.writes},
                                      {"reads", sm.reads},
                                      {"oracle_duplicates", sm.oracle_duplicates},
                                      {"inline_deduped", sm.inline_deduped},
                                      {"written_new", sm.written_new},
                                      {"materialized", sm.materialized},
                                      {"cache_hits", sm.cache_hits},
                                      {"cache_misses", sm.cache_misses},
                                      {"cache_rejections", sm.cache_rejections},
                                      {"cache_admissions", sm.cache_admissions},
                                      {"occupancy_final", sm.occupancy_final}};
    }
    j["streams"] = streams;
    return j.dump(2) + "\n";
}

void emit_report(const RunMetrics& metrics, const Timeline& timeline,
                 const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    {
        auto out = open_out(out_dir + "/summary.json");
        out << summary_json(metrics);
    }
    auto out = open_out(out_dir + "/timeline.csv");
    out << "kind,seq,stream,n_i,u,ldss,predicted,lp_ms,oracle_ldss,entries,hits,misses,"
           "rejections,threshold,mean_d,mean_r,read_ratio\n";
    for (const auto& r : timeline.estimates)
        out << "estimate," << r.interval << ',' << r.stream << ',' << r.n_i << ',' << r.u << ','
            << r.ldss << ',' << r.predicted << ',' << r.lp_ms << ',' << r.oracle_ldss
            << ",,,,,,,,\n";
    for (const auto& r : timeline.occupancy)
        out << "occupancy," << r.seq << ',' << r.stream << ",,,,,,," << r.entries << ','
            << r.hits << ',' << r.misses << ',' << r.rejections << ",,,,\n";
    for (const auto& r : timeline.thresholds)
        out << "threshold," << r.time << ',' << r.stream << ",,,,,,,,,,," << r.threshold << ','
            << r.mean_d << ',' << r.mean_r << ',' << r.read_ratio << '\n';
}

void write_compare(const std::vector<RunMetrics>& runs, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    auto out = open_out(out_dir + "/compare.csv");
    out << "mode,metric,value\n";
    for (const auto& m : runs) {
        out << m.mode << ",inline_dedup_ratio," << m.inline_dedup_ratio() << '\n';
        out << m.mode << ",inline_deduped," << m.inline_deduped << '\n';
        out << m.mode << ",postprocess_deduped," << m.postprocess_deduped << '\n';
        out << m.mode << ",average_hits," << m.average_hits() << '\n';
        out << m.mode << ",peak_blocks," << m.peak_blocks << '\n';
        out << m.mode << ",live_blocks_final," << m.live_blocks_final << '\n';
        out << m.mode << ",cache_hits," << m.cache_hits << '\n';
        out << m.mode << ",fingerprints_admitted," << m.fingerprints_admitted << '\n';
    }
}

void write_oracle_stats(const OracleIndex& oracle, const std::vector<OracleLdssRow>& ldss,
                        const std::string& out_path) {
    json j;
    j["writes"] = oracle.writes();
    j["reads"] = oracle.reads();
    j["distinct_fingerprints"] = oracle.distinct_fingerprints();
    j["duplicate_writes"] = oracle.duplicate_writes();
    json streams = json::object();
    for (const auto& [s, st] : oracle.per_stream())
        streams[std::to_string(s)] = {
            {"writes", st.writes}, {"reads", st.reads}, {"duplicates", st.duplicates}};
    j["streams"] = streams;
    json rows = json::array();
    for (const auto& r : ldss)
        rows.push_back({{"interval", r.interval},
                        {"stream", r.stream},
                        {"writes", r.writes},
                        {"distinct", r.distinct},
                        {"ldss", r.ldss}});
    j["interval_ldss"] = rows;
    auto out = open_out(out_path);
    out << j.dump(2) << "\n";
}

}  // namespace dedup
