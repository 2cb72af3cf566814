#pragma once

#include <memory>
#include <string>

#include "engine.hpp"
#include "metrics.hpp"

namespace dedup {

struct RunOptions {
    EngineConfig engine;
    uint64_t pp_interval = 0;  // writes between post-processing passes; 0 = end only
};

struct RunResult {
    RunMetrics metrics;
    Timeline timeline;
};

// Full pipeline for one trace: streaming replay with the exact-count oracle
// accumulated alongside, post-processing at the configured cadence plus a
// final pass, integrity sweep, and the closed-run exactness checks.
RunResult run_replay(const RunOptions& opts, const std::string& trace_path);

// Same, over in-memory records (tests). `trace_name` only labels the report.
RunResult run_replay(const RunOptions& opts, const TraceHeader& header,
                     const std::vector<TraceRecord>& records, const std::string& trace_name);

}  // namespace dedup
