#include "trace.hpp"

#include <charconv>
#include <cstring>

#include "rng.hpp"

namespace dedup {

namespace {

int hex_nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

uint64_t parse_u64(std::string_view s, const char* what) {
    uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw ParseError(std::string("invalid ") + what + ": '" + std::string(s) + "'");
    return v;
}

// Splits on ',' into at most `max_fields` pieces; returns the count.
size_t split_csv(std::string_view line, std::string_view* out, size_t max_fields) {
    size_t n = 0;
    size_t start = 0;
    while (n < max_fields) {
        size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out[n++] = line.substr(start);
            return n;
        }
        out[n++] = line.substr(start, pos - start);
        start = pos + 1;
    }
    return n;
}

}  // namespace

std::string Fingerprint::to_hex() const {
    static const char* digits = "0123456789abcdef";
    std::string s(32, '0');
    for (size_t i = 0; i < digest.size(); ++i) {
        s[2 * i] = digits[digest[i] >> 4];
        s[2 * i + 1] = digits[digest[i] & 0xf];
    }
    return s;
}

Fingerprint Fingerprint::from_hex(const std::string& hex) {
    if (hex.size() != 32) throw ParseError("fingerprint must be 32 hex chars, got '" + hex + "'");
    Fingerprint fp;
    for (size_t i = 0; i < 16; ++i) {
        int hi = hex_nibble(hex[2 * i]);
        int lo = hex_nibble(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) throw ParseError("invalid hex in fingerprint '" + hex + "'");
        fp.digest[i] = static_cast<uint8_t>((hi << 4) | lo);
    }
    return fp;
}

Fingerprint Fingerprint::from_u64(uint64_t seed) {
    Fingerprint fp;
    uint64_t s = seed;
    uint64_t a = splitmix64(s);
    uint64_t b = splitmix64(s);
    std::memcpy(fp.digest.data(), &a, 8);
    std::memcpy(fp.digest.data() + 8, &b, 8);
    return fp;
}

TraceReader::TraceReader(const std::string& path) : in_(path), path_(path) {
    if (!in_) throw IoError("cannot open trace file: " + path);
    std::string line;
    if (!std::getline(in_, line) || line.empty() || line[0] != '#')
        throw ParseError(path + ": missing '#' header line");
    ++line_no_;

    std::string_view body(line);
    body.remove_prefix(1);
    bool have_m = false, have_bs = false, have_n = false;
    size_t start = 0;
    while (start <= body.size()) {
        size_t pos = body.find(',', start);
        std::string_view kv = body.substr(start, pos == std::string::npos ? pos : pos - start);
        start = (pos == std::string::npos) ? body.size() + 1 : pos + 1;
        if (kv.empty()) continue;
        size_t eq = kv.find('=');
        if (eq == std::string_view::npos) fail("malformed header entry '" + std::string(kv) + "'");
        std::string_view key = kv.substr(0, eq);
        std::string_view val = kv.substr(eq + 1);
        if (key == "M") {
            header_.stream_count = static_cast<uint32_t>(parse_u64(val, "M"));
            have_m = true;
        } else if (key == "bs") {
            header_.block_size = static_cast<uint32_t>(parse_u64(val, "bs"));
            have_bs = true;
        } else if (key == "n") {
            header_.record_count = parse_u64(val, "n");
            have_n = true;
        } else if (key == "seed") {
            header_.seed = parse_u64(val, "seed");
        } else if (key == "types") {
            for (char c : val) {
                if (c != 'U' && c != 'P' && c != 'H') fail("unknown stream type tag");
                header_.types.push_back(static_cast<StreamType>(c));
            }
        } else {
            fail("unknown header key '" + std::string(key) + "'");
        }
    }
    if (!have_m || !have_bs || !have_n) fail("header requires keys M, bs, n");
    if (header_.block_size != kBlockSize) fail("unsupported block size");
    if (!header_.types.empty() && header_.types.size() != header_.stream_count)
        fail("types tag count does not match M");
}

bool TraceReader::next(TraceRecord& out) {
    std::string line;
    while (std::getline(in_, line)) {
        ++line_no_;
        if (line.empty()) continue;
        if (line[0] == '#') continue;  // stray comment lines tolerated

        std::string_view fields[6];
        size_t nf = split_csv(line, fields, 6);
        if (nf < 4) fail("expected at least 4 fields");

        out.timestamp_ns = parse_u64(fields[0], "timestamp");
        out.stream = static_cast<StreamId>(parse_u64(fields[1], "stream"));
        if (out.stream >= header_.stream_count) fail("stream id out of range");
        if (fields[2] == "W")
            out.op = Op::Write;
        else if (fields[2] == "R")
            out.op = Op::Read;
        else
            fail("op must be R or W");
        out.lba = parse_u64(fields[3], "lba");

        if (out.op == Op::Write) {
            if (nf != 5 || fields[4].empty()) fail("WRITE record requires a fingerprint");
            out.fingerprint = Fingerprint::from_hex(std::string(fields[4]));
        } else {
            if (nf != 4) fail("READ record must not carry a fingerprint");
            out.fingerprint = Fingerprint{};
        }

        if (records_read_ > 0 && out.timestamp_ns < last_ts_) fail("non-monotone timestamp");
        last_ts_ = out.timestamp_ns;
        ++records_read_;
        if (records_read_ > header_.record_count) fail("more records than header count n");
        return true;
    }
    if (records_read_ != header_.record_count)
        throw ParseError(path_ + ": header declares " + std::to_string(header_.record_count) +
                         " records, file has " + std::to_string(records_read_));
    return false;
}

std::vector<TraceRecord> TraceReader::read_all() {
    std::vector<TraceRecord> recs;
    recs.reserve(header_.record_count);
    TraceRecord r;
    while (next(r)) recs.push_back(r);
    return recs;
}

void TraceReader::fail(const std::string& what) const {
    throw ParseError(path_ + ":" + std::to_string(line_no_) + ": " + what);
}

TraceWriter::TraceWriter(const std::string& path, const TraceHeader& header)
    : out_(path), path_(path), header_(header) {
    if (!out_) throw IoError("cannot open trace file for writing: " + path);
    out_ << "#M=" << header.stream_count << ",bs=" << header.block_size << ",n="
         << header.record_count;
    if (header.seed) out_ << ",seed=" << *header.seed;
    if (!header.types.empty()) {
        out_ << ",types=";
        for (StreamType t : header.types) out_ << static_cast<char>(t);
    }
    out_ << '\n';
}

void TraceWriter::append(const TraceRecord& rec) {
    if (written_ > 0 && rec.timestamp_ns < last_ts_)
        throw ParseError("records not sorted by timestamp");
    last_ts_ = rec.timestamp_ns;
    out_ << rec.timestamp_ns << ',' << rec.stream << ',' << (rec.is_write() ? 'W' : 'R') << ','
         << rec.lba;
    if (rec.is_write()) out_ << ',' << rec.fingerprint.to_hex();
    out_ << '\n';
    ++written_;
}

void TraceWriter::close() {
    if (closed_) return;
    closed_ = true;
    if (written_ != header_.record_count)
        throw ParseError("wrote " + std::to_string(written_) + " records, header declares " +
                         std::to_string(header_.record_count));
    out_.flush();
    if (!out_) throw IoError("write failure on " + path_);
    out_.close();
}

TraceWriter::~TraceWriter() {
    if (!closed_) {
        try {
            close();
        } catch (...) {
            // destructor must not throw; explicit close() reports errors
        }
    }
}

void write_trace(const std::string& path, const TraceHeader& header,
                 const std::vector<TraceRecord>& records) {
    TraceHeader h = header;
    h.record_count = records.size();
    TraceWriter w(path, h);
    for (const auto& r : records) w.append(r);
    w.close();
}

}  // namespace dedup
