#pragma once

#include <array>
#include <cstddef>
#include <deque>
#include <vector>

namespace dedup {

// Holt double exponential smoothing. forecast() = level + trend, floored at 0.
class DoubleExpSmoother {
public:
    DoubleExpSmoother(double alpha, double beta) : alpha_(alpha), beta_(beta) {}

    double update(double value) {
        if (!primed_) {
            level_ = value;
            trend_ = 0.0;
            primed_ = true;
        } else {
            double prev_level = level_;
            level_ = alpha_ * value + (1.0 - alpha_) * (level_ + trend_);
            trend_ = beta_ * (level_ - prev_level) + (1.0 - beta_) * trend_;
        }
        return forecast();
    }

    double forecast() const {
        if (!primed_) return 0.0;
        double f = level_ + trend_;
        return f < 0.0 ? 0.0 : f;
    }

    bool primed() const { return primed_; }

private:
    double alpha_, beta_;
    double level_ = 0, trend_ = 0;
    bool primed_ = false;
};

// Self-tuned variant: a small (alpha, beta) grid scored by trailing absolute
// forecast error; each update reports the forecast of the currently best pair.
class SelfTunedSmoother {
public:
    SelfTunedSmoother();

    double update(double value);
    double forecast() const;
    bool primed() const { return !candidates_.empty() && candidates_[0].smoother.primed(); }
    std::pair<double, double> active_params() const;

private:
    struct Candidate {
        double alpha, beta;
        DoubleExpSmoother smoother;
        std::deque<double> errors;  // last kErrorWindow absolute forecast errors
    };
    static constexpr size_t kErrorWindow = 8;

    std::vector<Candidate> candidates_;
    size_t best_ = 0;

    void rescore();
};

}  // namespace dedup
