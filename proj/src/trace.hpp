#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"

namespace dedup {

using StreamId = uint32_t;
using Lba = uint64_t;
using Pba = uint64_t;

constexpr uint32_t kBlockSize = 4096;
constexpr Pba kInvalidPba = ~0ULL;

// Content identity of one 4 KB block. 16 opaque bytes carried in the trace;
// the engine never hashes payloads.
struct Fingerprint {
    std::array<uint8_t, 16> digest{};

    bool operator==(const Fingerprint& o) const { return digest == o.digest; }
    bool operator!=(const Fingerprint& o) const { return digest != o.digest; }

    std::string to_hex() const;
    static Fingerprint from_hex(const std::string& hex);  // throws ParseError
    static Fingerprint from_u64(uint64_t seed);           // synthesis for generators
};

struct FingerprintHash {
    size_t operator()(const Fingerprint& fp) const {
        uint64_t v;
        static_assert(sizeof(v) <= sizeof(fp.digest));
        __builtin_memcpy(&v, fp.digest.data(), sizeof(v));
        return static_cast<size_t>(v);
    }
};

enum class Op : uint8_t { Read, Write };

// Stream type tag used by the DIODE-style gate. Default Unknown.
enum class StreamType : char { Unknown = 'U', PType = 'P', HType = 'H' };

struct TraceRecord {
    uint64_t timestamp_ns = 0;
    StreamId stream = 0;
    Op op = Op::Write;
    Lba lba = 0;
    Fingerprint fingerprint{};  // valid only when op == Write

    bool is_write() const { return op == Op::Write; }
};

struct TraceHeader {
    uint32_t stream_count = 0;           // M
    uint32_t block_size = kBlockSize;    // bs
    uint64_t record_count = 0;           // n
    std::optional<uint64_t> seed;        // generator seed, if known
    std::vector<StreamType> types;       // optional per-stream tags, size M when present

    StreamType type_of(StreamId s) const {
        return s < types.size() ? types[s] : StreamType::Unknown;
    }
};

// Streaming parser. Validates the header, field ranges, per-record invariants
// and monotone timestamps; errors carry the 1-based line number.
class TraceReader {
public:
    explicit TraceReader(const std::string& path);

    const TraceHeader& header() const { return header_; }

    // Returns false at end of input. Throws ParseError on malformed lines.
    bool next(TraceRecord& out);

    // Drains the file and checks the record count against the header.
    std::vector<TraceRecord> read_all();

private:
    std::ifstream in_;
    std::string path_;
    TraceHeader header_;
    uint64_t line_no_ = 0;
    uint64_t records_read_ = 0;
    uint64_t last_ts_ = 0;

    [[noreturn]] void fail(const std::string& what) const;
};

class TraceWriter {
public:
    TraceWriter(const std::string& path, const TraceHeader& header);

    // Records must arrive in non-decreasing timestamp order.
    void append(const TraceRecord& rec);
    void close();  // flushes and verifies the record count

    ~TraceWriter();

private:
    std::ofstream out_;
    std::string path_;
    TraceHeader header_;
    uint64_t written_ = 0;
    uint64_t last_ts_ = 0;
    bool closed_ = false;
};

// Convenience: write a full sequence (sorted by timestamp) in one call.
void write_trace(const std::string& path, const TraceHeader& header,
                 const std::vector<TraceRecord>& records);

}  // namespace dedup
