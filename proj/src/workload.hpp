#pragma once

#include <string>
#include <vector>

#include "rng.hpp"
#include "trace.hpp"

namespace dedup {

// Integer distribution over [1, ...] used for reuse distances and run lengths.
struct DistSpec {
    enum class Kind { Fixed, Geometric, Uniform, Zipf };
    Kind kind = Kind::Fixed;
    double a = 1;  // Fixed: value; Geometric: p; Uniform: window; Zipf: exponent s
    double b = 0;  // Zipf/Uniform(lo,hi): support bound

    static DistSpec fixed(uint64_t v) { return {Kind::Fixed, double(v), 0}; }
    static DistSpec geometric(double p) { return {Kind::Geometric, p, 0}; }
    static DistSpec uniform(uint64_t window) { return {Kind::Uniform, 1, double(window)}; }
    static DistSpec uniform(uint64_t lo, uint64_t hi) { return {Kind::Uniform, double(lo), double(hi)}; }
    static DistSpec zipf(double s, uint64_t window) { return {Kind::Zipf, s, double(window)}; }

    // Parses "fixed(4)", "geometric(0.5)", "uniform(1000)", "zipf(1.05,200000)".
    static DistSpec parse(const std::string& text);
    std::string to_string() const;

    void validate() const;  // throws ConfigError on degenerate parameters
    double mean() const;
};

class DistSampler {
public:
    explicit DistSampler(const DistSpec& spec);
    uint64_t sample(Rng& rng) const;
    double mean() const { return mean_; }

private:
    DistSpec spec_;
    double mean_ = 0;
    std::vector<double> zipf_cdf_;  // only for Kind::Zipf
};

struct StreamProfile {
    double write_ratio = 1.0;      // fraction of requests that are writes
    double duplicate_ratio = 0.0;  // fraction of writes repeating an earlier fingerprint
    DistSpec reuse_distance = DistSpec::geometric(0.5);  // per-stream write positions
    DistSpec run_length = DistSpec::fixed(1);            // contiguous-LBA duplicate runs
    uint64_t request_count = 0;
    double rate = 1000.0;  // requests per second
    StreamType type = StreamType::Unknown;

    void validate() const;
};

struct MixSpec {
    std::vector<StreamProfile> profiles;
    // overlap[i][j]: fraction of shared fingerprint space between streams i and j.
    // Symmetric, zero diagonal, entries in [0, 0.4].
    std::vector<std::vector<double>> overlap;

    void validate() const;
    double overlap_at(size_t i, size_t j) const {
        return overlap.empty() ? 0.0 : overlap[i][j];
    }
};

// Deterministic single-stream synthesis: same (profile, seed) -> identical records.
// Records carry stream id 0; timestamps start at 0 with 1e9/rate spacing.
std::vector<TraceRecord> generate_stream(const StreamProfile& profile, uint64_t seed);

// Generates every stream (stream i seeded with seed + i), injects cross-stream
// fingerprint overlap, merges by timestamp (ties keep stream order).
std::vector<TraceRecord> mix_streams(const MixSpec& spec, uint64_t seed);

// Mixes and writes the trace file (header M, bs, n, seed, types).
void generate_trace_file(const MixSpec& spec, uint64_t seed, const std::string& path);

// Named profile/mix presets. Throws ConfigError for unknown names.
StreamProfile profile_preset(const std::string& name);
MixSpec mix_preset(const std::string& name, double scale);
std::vector<std::string> mix_preset_names();

// Declarative mix config file (key=value plus [stream] / [overlap] sections).
MixSpec load_mixspec(const std::string& path);

}  // namespace dedup
