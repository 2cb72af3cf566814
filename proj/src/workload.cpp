#include "workload.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "errors.hpp"

namespace dedup {

// ---------------------------------------------------------------------------
// distributions

DistSpec DistSpec::parse(const std::string& text) {
    size_t open = text.find('(');
    size_t close = text.rfind(')');
    if (open == std::string::npos || close == std::string::npos || close < open)
        throw ConfigError("cannot parse distribution '" + text + "'");
    std::string name = text.substr(0, open);
    std::string args = text.substr(open + 1, close - open - 1);
    std::vector<double> vals;
    std::stringstream ss(args);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            vals.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw ConfigError("bad distribution argument '" + tok + "' in '" + text + "'");
        }
    }
    DistSpec spec;
    if (name == "fixed" && vals.size() == 1) {
        spec = fixed(static_cast<uint64_t>(vals[0]));
    } else if (name == "geometric" && vals.size() == 1) {
        spec = geometric(vals[0]);
    } else if (name == "uniform" && vals.size() == 1) {
        spec = uniform(static_cast<uint64_t>(vals[0]));
    } else if (name == "uniform" && vals.size() == 2) {
        spec = uniform(static_cast<uint64_t>(vals[0]), static_cast<uint64_t>(vals[1]));
    } else if (name == "zipf" && vals.size() == 2) {
        spec = zipf(vals[0], static_cast<uint64_t>(vals[1]));
    } else {
        throw ConfigError("unknown distribution '" + text + "'");
    }
    spec.validate();
    return spec;
}

std::string DistSpec::to_string() const {
    char buf[64];
    switch (kind) {
        case Kind::Fixed:
            snprintf(buf, sizeof(buf), "fixed(%llu)", (unsigned long long)a);
            break;
        case Kind::Geometric:
            snprintf(buf, sizeof(buf), "geometric(%g)", a);
            break;
        case Kind::Uniform:
            snprintf(buf, sizeof(buf), "uniform(%llu,%llu)", (unsigned long long)a,
                     (unsigned long long)b);
            break;
        case Kind::Zipf:
            snprintf(buf, sizeof(buf), "zipf(%g,%llu)", a, (unsigned long long)b);
            break;
    }
    return buf;
}

void DistSpec::validate() const {
    switch (kind) {
        case Kind::Fixed:
            if (a < 1) throw ConfigError("fixed distribution value must be >= 1");
            break;
        case Kind::Geometric:
            if (!(a > 0.0 && a <= 1.0)) throw ConfigError("geometric p must be in (0,1]");
            break;
        case Kind::Uniform:
            if (a < 1 || b < a) throw ConfigError("uniform bounds must satisfy 1 <= lo <= hi");
            break;
        case Kind::Zipf:
            if (a < 0.0 || b < 1) throw ConfigError("zipf requires s >= 0 and window >= 1");
            break;
    }
}

double DistSpec::mean() const {
    switch (kind) {
        case Kind::Fixed:
            return a;
        case Kind::Geometric:
            return 1.0 / a;
        case Kind::Uniform:
            return (a + b) / 2.0;
        case Kind::Zipf: {
            double norm = 0, m = 0;
            for (uint64_t d = 1; d <= static_cast<uint64_t>(b); ++d) {
                double w = std::pow(static_cast<double>(d), -a);
                norm += w;
                m += static_cast<double>(d) * w;
            }
            return m / norm;
        }
    }
    return 1.0;
}

DistSampler::DistSampler(const DistSpec& spec) : spec_(spec) {
    spec.validate();
    if (spec.kind == DistSpec::Kind::Zipf) {
        const auto n = static_cast<uint64_t>(spec.b);
        zipf_cdf_.resize(n);
        double acc = 0;
        for (uint64_t d = 1; d <= n; ++d) {
            acc += std::pow(static_cast<double>(d), -spec.a);
            zipf_cdf_[d - 1] = acc;
        }
        double norm = acc, m = 0;
        double prev = 0;
        for (uint64_t d = 1; d <= n; ++d) {
            m += static_cast<double>(d) * (zipf_cdf_[d - 1] - prev);
            prev = zipf_cdf_[d - 1];
            zipf_cdf_[d - 1] /= norm;
        }
        mean_ = m / norm;
        zipf_cdf_.back() = 1.0;
    } else {
        mean_ = spec.mean();
    }
}

uint64_t DistSampler::sample(Rng& rng) const {
    switch (spec_.kind) {
        case DistSpec::Kind::Fixed:
            return static_cast<uint64_t>(spec_.a);
        case DistSpec::Kind::Geometric:
            return rng.geometric(spec_.a);
        case DistSpec::Kind::Uniform:
            return rng.uniform_range(static_cast<uint64_t>(spec_.a),
                                     static_cast<uint64_t>(spec_.b));
        case DistSpec::Kind::Zipf: {
            double u = rng.uniform01();
            auto it = std::lower_bound(zipf_cdf_.begin(), zipf_cdf_.end(), u);
            return static_cast<uint64_t>(it - zipf_cdf_.begin()) + 1;
        }
    }
    return 1;
}

// ---------------------------------------------------------------------------
// profiles

void StreamProfile::validate() const {
    if (write_ratio < 0.0 || write_ratio > 1.0)
        throw ConfigError("write_ratio must be in [0,1]");
    if (duplicate_ratio < 0.0 || duplicate_ratio > 1.0)
        throw ConfigError("duplicate_ratio must be in [0,1]");
    if (rate <= 0.0) throw ConfigError("rate must be positive");
    reuse_distance.validate();
    run_length.validate();
}

void MixSpec::validate() const {
    if (profiles.empty()) throw ConfigError("mix requires at least one stream profile");
    for (const auto& p : profiles) p.validate();
    if (overlap.empty()) return;
    const size_t m = profiles.size();
    if (overlap.size() != m) throw ConfigError("overlap matrix size mismatch");
    for (size_t i = 0; i < m; ++i) {
        if (overlap[i].size() != m) throw ConfigError("overlap matrix size mismatch");
        double row = 0;
        for (size_t j = 0; j < m; ++j) {
            double v = overlap[i][j];
            if (v < 0.0 || v > 0.4) throw ConfigError("overlap entries must be in [0, 0.4]");
            if (i == j && v != 0.0) throw ConfigError("overlap diagonal must be zero");
            if (overlap[j][i] != v) throw ConfigError("overlap matrix must be symmetric");
            row += v;
        }
        if (row > 1.0) throw ConfigError("total overlap fraction per stream exceeds 1");
    }
}

// ---------------------------------------------------------------------------
// single-stream synthesis

namespace {

struct StreamGen {
    const StreamProfile& profile;
    Rng rng;
    DistSampler reuse;
    DistSampler runlen;
    uint64_t fp_space;  // seed for unique fingerprint synthesis
    uint64_t fp_counter = 0;

    std::vector<Fingerprint> history;  // fingerprint of every emitted write
    Lba next_lba = 0;
    uint64_t ns_per_req;

    // calibrated decision probabilities
    double p_write_burst;  // probability a new burst is a write burst
    double p_dup_run;      // probability a write burst is a duplicate run

    StreamGen(const StreamProfile& p, uint64_t seed)
        : profile(p),
          rng(derive_seed(seed, 0x01)),
          reuse(p.reuse_distance),
          runlen(p.run_length),
          fp_space(derive_seed(seed, 0x02)) {
        ns_per_req = std::max<uint64_t>(1, llround(1e9 / p.rate));
        const double dr = p.duplicate_ratio;
        const double el = runlen.mean();
        p_dup_run = dr / (el * (1.0 - dr) + dr);
        const double bw = p_dup_run * el + (1.0 - p_dup_run);  // writes per write burst
        const double br = el;                                  // reads per read burst
        const double wr = p.write_ratio;
        if (wr >= 1.0)
            p_write_burst = 1.0;
        else if (wr <= 0.0)
            p_write_burst = 0.0;
        else
            p_write_burst = wr * br / (bw * (1.0 - wr) + wr * br);
    }

    Fingerprint fresh_fp() { return Fingerprint::from_u64(derive_seed(fp_space, fp_counter++)); }

    // Reuse distance, re-ranged into the available history. A draw beyond the
    // written past falls back to a uniform pick over what exists; collapsing
    // it onto one boundary element would fabricate a single hot fingerprint.
    uint64_t draw_distance(Rng& rng) {
        const uint64_t hist = history.size();
        if (profile.reuse_distance.kind == DistSpec::Kind::Uniform) {
            const auto lo = static_cast<uint64_t>(profile.reuse_distance.a);
            const auto hi = static_cast<uint64_t>(profile.reuse_distance.b);
            if (hist > lo) return rng.uniform_range(std::max<uint64_t>(1, lo), std::min(hi, hist));
            // window not reachable yet: stay in the older half of the past so
            // a far-reference stream does not look temporally local early on
            return rng.uniform_range(std::max<uint64_t>(1, hist / 2), hist);
        }
        uint64_t d = reuse.sample(rng);
        if (d > hist) d = rng.uniform_range(1, hist);
        return d;
    }

    std::vector<TraceRecord> run(StreamId sid) {
        std::vector<TraceRecord> out;
        const uint64_t total = profile.request_count;
        out.reserve(total);

        uint64_t dup_left = 0, dup_dist = 0;
        uint64_t read_left = 0;
        Lba read_lba = 0;

        while (out.size() < total) {
            if (dup_left > 0) {
                emit_dup(out, sid, dup_dist);
                --dup_left;
                continue;
            }
            if (read_left > 0) {
                emit_read(out, sid, read_lba++);
                --read_left;
                continue;
            }
            if (rng.bernoulli(p_write_burst)) {
                if (rng.bernoulli(p_dup_run) && !history.empty()) {
                    uint64_t len = std::max<uint64_t>(1, runlen.sample(rng));
                    dup_dist = draw_distance(rng);
                    emit_dup(out, sid, dup_dist);
                    dup_left = len - 1;
                } else {
                    TraceRecord r = base(out.size(), sid);
                    r.op = Op::Write;
                    r.lba = next_lba++;
                    r.fingerprint = fresh_fp();
                    history.push_back(r.fingerprint);
                    out.push_back(r);
                }
            } else {
                uint64_t len = std::max<uint64_t>(1, runlen.sample(rng));
                read_lba = rng.uniform(std::max<Lba>(1, next_lba));
                emit_read(out, sid, read_lba++);
                read_left = len - 1;
            }
        }
        return out;
    }

    TraceRecord base(size_t idx, StreamId sid) const {
        TraceRecord r;
        r.timestamp_ns = static_cast<uint64_t>(idx) * ns_per_req;
        r.stream = sid;
        return r;
    }

    void emit_dup(std::vector<TraceRecord>& out, StreamId sid, uint64_t dist) {
        TraceRecord r = base(out.size(), sid);
        r.op = Op::Write;
        r.lba = next_lba++;
        r.fingerprint = history[history.size() - dist];
        history.push_back(r.fingerprint);
        out.push_back(r);
    }

    void emit_read(std::vector<TraceRecord>& out, StreamId sid, Lba lba) {
        TraceRecord r = base(out.size(), sid);
        r.op = Op::Read;
        r.lba = lba;
        out.push_back(r);
    }
};

}  // namespace

std::vector<TraceRecord> generate_stream(const StreamProfile& profile, uint64_t seed) {
    profile.validate();
    StreamGen gen(profile, seed);
    return gen.run(0);
}

// ---------------------------------------------------------------------------
// mixing

namespace {

// Replaces a fraction of each stream's distinct fingerprints with draws from a
// per-pair shared pool so that overlapping streams carry common content. Both
// sides consume the pool from index 0, which makes the shared sets actually
// intersect. Applied as a post-pass: the record structure is untouched.
void inject_overlap(const MixSpec& spec, uint64_t seed,
                    std::vector<std::vector<TraceRecord>>& streams) {
    const size_t m = streams.size();
    std::vector<std::vector<Fingerprint>> distinct(m);  // by first occurrence
    std::vector<std::unordered_map<Fingerprint, Fingerprint, FingerprintHash>> remap(m);
    for (size_t i = 0; i < m; ++i) {
        std::unordered_set<Fingerprint, FingerprintHash> seen;
        for (const auto& r : streams[i])
            if (r.is_write() && seen.insert(r.fingerprint).second)
                distinct[i].push_back(r.fingerprint);
    }

    for (size_t i = 0; i < m; ++i) {
        for (size_t j = i + 1; j < m; ++j) {
            double frac = spec.overlap_at(i, j);
            if (frac <= 0.0) continue;
            uint64_t pool_seed = derive_seed(seed, 0xB00Au + i * 131 + j);
            for (size_t side : {i, j}) {
                auto take = static_cast<size_t>(std::llround(frac * distinct[side].size()));
                Rng pick(derive_seed(pool_seed, side));
                // sample `take` distinct fingerprints of this stream, skipping
                // ones already remapped for another pair
                std::vector<size_t> idx(distinct[side].size());
                for (size_t k = 0; k < idx.size(); ++k) idx[k] = k;
                for (size_t k = 0; k + 1 < idx.size(); ++k)
                    std::swap(idx[k], idx[k + pick.uniform(idx.size() - k)]);
                size_t assigned = 0;
                for (size_t k = 0; k < idx.size() && assigned < take; ++k) {
                    const Fingerprint& fp = distinct[side][idx[k]];
                    if (remap[side].count(fp)) continue;
                    remap[side][fp] = Fingerprint::from_u64(derive_seed(pool_seed, 0x5000 + assigned));
                    ++assigned;
                }
            }
        }
    }

    for (size_t i = 0; i < m; ++i) {
        if (remap[i].empty()) continue;
        for (auto& r : streams[i]) {
            if (!r.is_write()) continue;
            auto it = remap[i].find(r.fingerprint);
            if (it != remap[i].end()) r.fingerprint = it->second;
        }
    }
}

}  // namespace

std::vector<TraceRecord> mix_streams(const MixSpec& spec, uint64_t seed) {
    spec.validate();
    const size_t m = spec.profiles.size();
    std::vector<std::vector<TraceRecord>> streams(m);
    for (size_t i = 0; i < m; ++i) {
        StreamGen gen(spec.profiles[i], seed + i);
        streams[i] = gen.run(static_cast<StreamId>(i));
    }
    inject_overlap(spec, seed, streams);

    std::vector<TraceRecord> mixed;
    size_t total = 0;
    for (const auto& s : streams) total += s.size();
    mixed.reserve(total);
    for (const auto& s : streams) mixed.insert(mixed.end(), s.begin(), s.end());
    std::stable_sort(mixed.begin(), mixed.end(),
                     [](const TraceRecord& a, const TraceRecord& b) {
                         return a.timestamp_ns < b.timestamp_ns;
                     });
    return mixed;
}

void generate_trace_file(const MixSpec& spec, uint64_t seed, const std::string& path) {
    auto records = mix_streams(spec, seed);
    TraceHeader h;
    h.stream_count = static_cast<uint32_t>(spec.profiles.size());
    h.record_count = records.size();
    h.seed = seed;
    bool any_tag = false;
    for (const auto& p : spec.profiles) any_tag |= (p.type != StreamType::Unknown);
    if (any_tag)
        for (const auto& p : spec.profiles) h.types.push_back(p.type);
    write_trace(path, h, records);
}

// ---------------------------------------------------------------------------
// presets

StreamProfile profile_preset(const std::string& name) {
    StreamProfile p;
    if (name == "fiu-mail") {
        p.write_ratio = 0.9142;
        p.duplicate_ratio = 0.9098;
        p.reuse_distance = DistSpec::zipf(0.8, 1000000);
        // duplicate mass rides in long runs; singles dominate by count
        p.run_length = DistSpec::zipf(1.2, 64);
    } else if (name == "fiu-web") {
        p.write_ratio = 0.7327;
        p.duplicate_ratio = 0.5498;
        p.reuse_distance = DistSpec::zipf(1.05, 100000);
        p.run_length = DistSpec::geometric(0.75);
    } else if (name == "fiu-home") {
        p.write_ratio = 0.9044;
        p.duplicate_ratio = 0.3048;
        p.reuse_distance = DistSpec::zipf(1.05, 150000);
        p.run_length = DistSpec::geometric(0.5);
    } else if (name == "cloud-ftp") {
        p.write_ratio = 0.8394;
        p.duplicate_ratio = 0.2077;
        // duplicates routinely arrive far from their previous occurrence
        p.reuse_distance = DistSpec::uniform(15000, 300000);
        p.run_length = DistSpec::uniform(16, 64);
        p.type = StreamType::PType;
    } else {
        throw ConfigError("unknown stream preset '" + name + "'");
    }
    p.request_count = 100000;
    p.rate = 1000.0;
    return p;
}

namespace {

StreamProfile sized(const std::string& preset, uint64_t requests, double duration_s) {
    StreamProfile p = profile_preset(preset);
    p.request_count = requests;
    p.rate = static_cast<double>(requests) / duration_s;
    return p;
}

}  // namespace

MixSpec mix_preset(const std::string& name, double scale) {
    if (scale <= 0.0) throw ConfigError("scale must be positive");
    auto n = [scale](uint64_t base) {
        return std::max<uint64_t>(100, static_cast<uint64_t>(std::llround(base * scale)));
    };
    const double dur = 100.0;
    // L-side request shares follow the source compositions: the mail-like
    // template dominates the good-locality portion in every mix.
    MixSpec mix;
    if (name == "workload-A" || name == "workload-a") {
        mix.profiles = {sized("fiu-mail", n(140000), dur), sized("fiu-home", n(7000), dur),
                        sized("fiu-web", n(3000), dur), sized("cloud-ftp", n(50000), dur)};
    } else if (name == "workload-B" || name == "workload-b") {
        mix.profiles = {sized("fiu-mail", n(93000), dur), sized("fiu-home", n(5000), dur),
                        sized("fiu-web", n(2000), dur), sized("cloud-ftp", n(100000), dur)};
    } else if (name == "workload-C" || name == "workload-c") {
        mix.profiles = {sized("fiu-mail", n(43000), dur), sized("fiu-home", n(4500), dur),
                        sized("fiu-web", n(2500), dur), sized("cloud-ftp", n(75000), dur),
                        sized("cloud-ftp", n(75000), dur)};
        mix.overlap.assign(5, std::vector<double>(5, 0.0));
        mix.overlap[3][4] = mix.overlap[4][3] = 0.2;  // same-template content overlap
    } else {
        MixSpec single;
        single.profiles = {sized(name, n(100000), dur)};  // throws for unknown names
        return single;
    }
    return mix;
}

std::vector<std::string> mix_preset_names() {
    return {"workload-A", "workload-B", "workload-C", "fiu-mail", "fiu-web", "fiu-home",
            "cloud-ftp"};
}

// ---------------------------------------------------------------------------
// mix config file

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

void apply_stream_key(StreamProfile& p, const std::string& key, const std::string& val,
                      double duration) {
    if (key == "preset") {
        uint64_t keep_req = p.request_count;
        p = profile_preset(val);
        p.request_count = keep_req;
    } else if (key == "requests") {
        p.request_count = std::stoull(val);
        if (duration > 0) p.rate = static_cast<double>(p.request_count) / duration;
    } else if (key == "rate") {
        p.rate = std::stod(val);
    } else if (key == "write_ratio") {
        p.write_ratio = std::stod(val);
    } else if (key == "duplicate_ratio") {
        p.duplicate_ratio = std::stod(val);
    } else if (key == "reuse") {
        p.reuse_distance = DistSpec::parse(val);
    } else if (key == "runlen") {
        p.run_length = DistSpec::parse(val);
    } else if (key == "type") {
        if (val == "U")
            p.type = StreamType::Unknown;
        else if (val == "P")
            p.type = StreamType::PType;
        else if (val == "H")
            p.type = StreamType::HType;
        else
            throw ConfigError("stream type must be U, P or H");
    } else {
        throw ConfigError("unknown stream key '" + key + "'");
    }
}

}  // namespace

MixSpec load_mixspec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open mix config: " + path);
    MixSpec mix;
    double duration = 0;
    enum class Section { Global, Stream, Overlap } section = Section::Global;
    std::vector<std::tuple<size_t, size_t, double>> overlaps;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        try {
            if (t == "[stream]") {
                section = Section::Stream;
                mix.profiles.emplace_back();
                continue;
            }
            if (t == "[overlap]") {
                section = Section::Overlap;
                continue;
            }
            if (t[0] == '[') throw ConfigError("unknown section " + t);
            size_t eq = t.find('=');
            if (eq == std::string::npos) throw ConfigError("expected key = value");
            std::string key = trim(t.substr(0, eq));
            std::string val = trim(t.substr(eq + 1));
            switch (section) {
                case Section::Global:
                    if (key == "duration")
                        duration = std::stod(val);
                    else
                        throw ConfigError("unknown global key '" + key + "'");
                    break;
                case Section::Stream:
                    apply_stream_key(mix.profiles.back(), key, val, duration);
                    break;
                case Section::Overlap: {
                    std::stringstream ss(key);
                    size_t i, j;
                    if (!(ss >> i >> j)) throw ConfigError("overlap key must be 'i j'");
                    overlaps.emplace_back(i, j, std::stod(val));
                    break;
                }
            }
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (!overlaps.empty()) {
        mix.overlap.assign(mix.profiles.size(), std::vector<double>(mix.profiles.size(), 0.0));
        for (auto [i, j, v] : overlaps) {
            if (i >= mix.profiles.size() || j >= mix.profiles.size())
                throw ConfigError("overlap indices out of range");
            mix.overlap[i][j] = mix.overlap[j][i] = v;
        }
    }
    mix.validate();
    return mix;
}

}  // namespace dedup
