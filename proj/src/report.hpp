#pragma once

#include <string>
#include <vector>

#include "metrics.hpp"

namespace dedup {

// Writes summary.json (all scalars, stable key order) and timeline.csv
// (estimate/occupancy/threshold rows) under out_dir. Throws IoError.
void emit_report(const RunMetrics& metrics, const Timeline& timeline,
                 const std::string& out_dir);

std::string summary_json(const RunMetrics& metrics);

// One row per (mode, metric) for A/B runs.
void write_compare(const std::vector<RunMetrics>& runs, const std::string& out_dir);

// cmd_oracle output: global/per-stream exact stats plus per-interval LDSS.
void write_oracle_stats(const OracleIndex& oracle, const std::vector<OracleLdssRow>& ldss,
                        const std::string& out_path);

}  // namespace dedup
