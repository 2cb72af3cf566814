#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "reservoir.hpp"

namespace dedup {

// Duplicate-count estimate for one stream over one estimation interval.
struct LdssEstimate {
    StreamId stream = 0;
    uint64_t interval = 0;
    uint64_t writes = 0;        // N_i: stream writes covered by the interval
    double unique_writes = 0;   // u: estimated distinct fingerprints
    double ldss = 0;            // N_i - u, clamped to [0, N_i]
    double predicted_next = 0;  // filled by the smoother
    double lp_ms = 0;
    bool bypassed = false;      // low-traffic stream, LP skipped
};

struct UnseenParams {
    uint64_t support_cap = 64;      // largest true-count column in the LP
    double high_freq_factor = 3.0;  // sample counts >= factor/p bypass the LP
    double ldss_floor = 1.0;        // assigned to bypassed streams
};

// Unseen-distribution estimation: fits the interval-wide fingerprint frequency
// histogram H from the sampled histogram `hs` via a weighted-L1 linear program
// with binomial observation probabilities, then returns ldss = n_i - sum(H).
// `p` is the effective sampling rate in (0, 1].
LdssEstimate estimate_ldss(const FrequencyHistogram& hs, uint64_t n_i, double p,
                           const UnseenParams& params = {});

// Baseline for comparison: duplicates seen in the sample scaled by 1/p.
double naive_scaled_ldss(const FrequencyHistogram& hs, double p);

struct StreamIntervalInput {
    StreamId stream;
    FrequencyHistogram ffh;
    uint64_t n_i;
};

struct EstimateOutcome {
    std::optional<LdssEstimate> estimate;
    std::string error;  // non-empty when the LP failed for this stream
};

// Runs estimate_ldss per stream; streams with n_i below max(100, 0.001 * n)
// skip the LP and receive the configured floor. Per-stream failures are
// reported without aborting the others.
std::vector<EstimateOutcome> estimate_all(const std::vector<StreamIntervalInput>& inputs,
                                          uint64_t interval_index, uint64_t interval_len,
                                          double p, const UnseenParams& params = {});

}  // namespace dedup
