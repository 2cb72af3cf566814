#include "threshold.hpp"

#include <algorithm>
#include <cmath>

namespace dedup {

void ThresholdState::record_write_run(uint64_t run_length) {
    if (run_length == 0) return;
    ++v_w_[std::min<uint64_t>(run_length, kSlots)];
}

void ThresholdState::record_read_run(uint64_t run_length) {
    if (run_length == 0) return;
    ++v_r_[std::min<uint64_t>(run_length, kSlots)];
}

namespace {

double histogram_mean(const std::array<uint64_t, ThresholdState::kSlots + 1>& v) {
    uint64_t count = 0, mass = 0;
    for (uint32_t len = 1; len <= ThresholdState::kSlots; ++len) {
        count += v[len];
        mass += static_cast<uint64_t>(len) * v[len];
    }
    return count == 0 ? 0.0 : static_cast<double>(mass) / static_cast<double>(count);
}

uint64_t histogram_total(const std::array<uint64_t, ThresholdState::kSlots + 1>& v) {
    uint64_t count = 0;
    for (uint32_t len = 1; len <= ThresholdState::kSlots; ++len) count += v[len];
    return count;
}

}  // namespace

double ThresholdState::mean_write_run() const { return histogram_mean(v_w_); }
double ThresholdState::mean_read_run() const { return histogram_mean(v_r_); }

double ThresholdState::read_ratio() const {
    uint64_t total = reads_since_reset_ + writes_since_reset_;
    return total == 0 ? 0.0 : static_cast<double>(reads_since_reset_) / static_cast<double>(total);
}

void ThresholdState::update_threshold(double current_dedup_ratio) {
    const uint64_t sw = histogram_total(v_w_);
    const uint64_t sr = histogram_total(v_r_);
    last_update_ratio_ = current_dedup_ratio;
    if (sw == 0 && sr == 0) return;

    double t;
    if (sw == 0)
        t = mean_read_run();
    else if (sr == 0)
        t = mean_write_run();
    else {
        double r = read_ratio();
        t = (1.0 - r) * mean_write_run() + r * mean_read_run();
    }
    threshold_ = static_cast<uint32_t>(
        std::clamp<long long>(std::llround(t), 1, static_cast<long long>(kSlots)));
}

bool ThresholdState::maybe_reset(double current_dedup_ratio) {
    if (last_update_ratio_ < 0.0) return false;
    if (current_dedup_ratio >= 0.5 * last_update_ratio_) return false;
    v_w_.fill(0);
    v_r_.fill(0);
    reads_since_reset_ = 0;
    writes_since_reset_ = 0;
    return true;
}

}  // namespace dedup
