#include "smoothing.hpp"

#include <cmath>
#include <limits>

namespace dedup {

SelfTunedSmoother::SelfTunedSmoother() {
    const double grid[] = {0.2, 0.5, 0.8};
    for (double a : grid)
        for (double b : grid) candidates_.push_back({a, b, DoubleExpSmoother(a, b), {}});
}

double SelfTunedSmoother::update(double value) {
    for (auto& c : candidates_) {
        if (c.smoother.primed()) {
            c.errors.push_back(std::abs(c.smoother.forecast() - value));
            if (c.errors.size() > kErrorWindow) c.errors.pop_front();
        }
        c.smoother.update(value);
    }
    rescore();
    return forecast();
}

void SelfTunedSmoother::rescore() {
    double best_err = std::numeric_limits<double>::infinity();
    size_t best = 0;
    for (size_t i = 0; i < candidates_.size(); ++i) {
        const auto& e = candidates_[i].errors;
        if (e.empty()) continue;
        double sum = 0;
        for (double v : e) sum += v;
        double avg = sum / static_cast<double>(e.size());
        if (avg < best_err) {
            best_err = avg;
            best = i;
        }
    }
    best_ = best;
}

double SelfTunedSmoother::forecast() const { return candidates_[best_].smoother.forecast(); }

std::pair<double, double> SelfTunedSmoother::active_params() const {
    return {candidates_[best_].alpha, candidates_[best_].beta};
}

}  // namespace dedup
