#include "metrics.hpp"

#include <cmath>

namespace dedup {

uint64_t memory_overhead_bytes(double eif, double sample_rate, uint64_t cache_entries) {
    constexpr double kFpSize = 16.0;
    constexpr double kCounterSize = 4.0;
    double ei = eif * static_cast<double>(cache_entries);
    double bytes = ei * sample_rate * (kFpSize + kCounterSize);
    return bytes <= 0 ? 0 : static_cast<uint64_t>(std::llround(bytes));
}

}  // namespace dedup
