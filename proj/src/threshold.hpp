#pragma once

#include <array>
#include <cstdint>

namespace dedup {

// Per-stream adaptive duplicate-sequence threshold. V_w counts maximal
// duplicate-run lengths, V_r sequential-read run lengths; both have 64 slots
// with longer runs clamped into the last one.
class ThresholdState {
public:
    static constexpr uint32_t kSlots = 64;
    static constexpr uint32_t kInitialThreshold = 16;

    uint32_t threshold() const { return threshold_; }
    void set_threshold(uint32_t t) { threshold_ = t; }

    void note_write() { ++writes_since_reset_; }
    void note_read() { ++reads_since_reset_; }

    void record_write_run(uint64_t run_length);
    void record_read_run(uint64_t run_length);

    double mean_write_run() const;
    double mean_read_run() const;
    // read ratio among all requests since the last reset
    double read_ratio() const;

    // T = round((1-r) * mean_d + r * mean_r), clamped to [1, 64]. When only
    // one histogram has data its mean is used alone; with neither, T holds.
    void update_threshold(double current_dedup_ratio);

    // Zeroes both vectors when the ratio dropped below half of its value at
    // the last update. The threshold itself is retained.
    bool maybe_reset(double current_dedup_ratio);

    uint64_t write_run_count(uint32_t slot) const { return v_w_[slot]; }
    uint64_t read_run_count(uint32_t slot) const { return v_r_[slot]; }

private:
    std::array<uint64_t, kSlots + 1> v_w_{};  // slots 1..64
    std::array<uint64_t, kSlots + 1> v_r_{};
    uint32_t threshold_ = kInitialThreshold;
    double last_update_ratio_ = -1.0;  // < 0 until the first update
    uint64_t reads_since_reset_ = 0;
    uint64_t writes_since_reset_ = 0;
};

}  // namespace dedup
