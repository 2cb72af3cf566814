#include "unseen.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "errors.hpp"
#include "simplex.hpp"

namespace dedup {

namespace {

double clamp_ldss(double v, uint64_t n_i) {
    return std::min(std::max(v, 0.0), static_cast<double>(n_i));
}

// Binomial(c, p) pmf for r = 0..rmax, by the usual multiplicative recurrence.
std::vector<double> binom_row(uint64_t c, double p, uint64_t rmax) {
    std::vector<double> pmf(rmax + 1, 0.0);
    double v = std::pow(1.0 - p, static_cast<double>(c));
    const double odds = p / (1.0 - p);
    for (uint64_t r = 0; r <= rmax; ++r) {
        if (r <= c) pmf[r] = v;
        if (r < c) v *= odds * static_cast<double>(c - r) / static_cast<double>(r + 1);
    }
    return pmf;
}

}  // namespace

double naive_scaled_ldss(const FrequencyHistogram& hs, double p) {
    if (p <= 0.0) return 0.0;
    uint64_t dup = hs.occurrences() - hs.distinct();
    return static_cast<double>(dup) / p;
}

LdssEstimate estimate_ldss(const FrequencyHistogram& hs, uint64_t n_i, double p,
                           const UnseenParams& params) {
    if (p <= 0.0 || p > 1.0) throw EstimationError("sampling rate must be in (0, 1]");
    auto t0 = std::chrono::steady_clock::now();

    LdssEstimate est;
    est.writes = n_i;

    auto finish = [&](double u) {
        est.unique_writes = u;
        est.ldss = clamp_ldss(static_cast<double>(n_i) - u, n_i);
        est.lp_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                        .count();
        return est;
    };

    if (n_i == 0 || hs.empty()) return finish(static_cast<double>(n_i));

    if (p >= 1.0 - 1e-12) {
        // full observation: the sample histogram is the interval histogram
        return finish(static_cast<double>(hs.distinct()));
    }

    // Sample counts at or above the cutoff are dense enough to treat as fully
    // observed; they are scaled directly and kept out of the LP.
    const uint64_t cutoff =
        std::max<uint64_t>(2, static_cast<uint64_t>(std::ceil(params.high_freq_factor / p)));
    double direct_u = 0, direct_mass = 0;
    uint64_t max_lp_mult = 0;
    std::vector<std::pair<uint64_t, uint64_t>> lp_rows;  // (multiplicity, count)
    for (const auto& [mult, count] : hs.f) {
        if (mult >= cutoff) {
            direct_u += static_cast<double>(count);
            direct_mass += static_cast<double>(count) * static_cast<double>(mult) / p;
        } else {
            lp_rows.emplace_back(mult, count);
            max_lp_mult = std::max(max_lp_mult, mult);
        }
    }
    if (lp_rows.empty()) return finish(direct_u);

    const double n_lp = std::max(0.0, static_cast<double>(n_i) - direct_mass);

    // Support grid: true counts 1..C with C = observed max scaled by 1/p,
    // capped so the LP stays fixed-size.
    const uint64_t rmax = std::min<uint64_t>(cutoff - 1, max_lp_mult + 2);
    uint64_t c_max = static_cast<uint64_t>(std::ceil(static_cast<double>(max_lp_mult) / p));
    c_max = std::min(params.support_cap, std::max<uint64_t>(c_max, static_cast<uint64_t>(std::ceil(1.0 / p))));

    // Observed histogram over rows 1..rmax (absent rows are zeros and get the
    // largest weight, penalizing mass that would spill into them).
    std::vector<double> observed(rmax + 1, 0.0);
    for (auto [mult, count] : lp_rows) observed[mult] = static_cast<double>(count);

    // Variables: H[1..C], then e+[1..rmax], e-[1..rmax].
    const size_t nh = c_max;
    const size_t nvars = nh + 2 * rmax;
    std::vector<std::vector<double>> a;
    std::vector<double> b, cost(nvars, 0.0);

    std::vector<std::vector<double>> binom(c_max + 1);
    for (uint64_t col = 1; col <= c_max; ++col) binom[col] = binom_row(col, p, rmax);

    for (uint64_t r = 1; r <= rmax; ++r) {
        std::vector<double> row(nvars, 0.0);
        for (uint64_t col = 1; col <= c_max; ++col) row[col - 1] = binom[col][r];
        row[nh + (r - 1)] = 1.0;           // e+
        row[nh + rmax + (r - 1)] = -1.0;   // e-
        a.push_back(std::move(row));
        b.push_back(observed[r]);
        double w = 1.0 / std::sqrt(observed[r] + 1.0);
        cost[nh + (r - 1)] = w;
        cost[nh + rmax + (r - 1)] = w;
    }
    // total-mass consistency: sum_c c * H[c] covers the LP portion of N_i
    {
        std::vector<double> row(nvars, 0.0);
        for (uint64_t col = 1; col <= c_max; ++col) row[col - 1] = static_cast<double>(col);
        a.push_back(std::move(row));
        b.push_back(n_lp);
    }

    LpResult lp;
    try {
        lp = solve_lp(std::move(a), std::move(b), std::move(cost));
    } catch (const EstimationError& e) {
        throw EstimationError(std::string(e.what()) + " (n_i=" + std::to_string(n_i) +
                              ", p=" + std::to_string(p) + ", rows=" + std::to_string(rmax) +
                              ", cols=" + std::to_string(c_max) + ")");
    }

    double u = direct_u;
    for (size_t i = 0; i < nh; ++i) u += lp.x[i];
    return finish(u);
}

std::vector<EstimateOutcome> estimate_all(const std::vector<StreamIntervalInput>& inputs,
                                          uint64_t interval_index, uint64_t interval_len,
                                          double p, const UnseenParams& params) {
    const uint64_t traffic_floor = std::max<uint64_t>(
        100, static_cast<uint64_t>(0.001 * static_cast<double>(interval_len)));
    std::vector<EstimateOutcome> out;
    out.reserve(inputs.size());
    for (const auto& in : inputs) {
        EstimateOutcome o;
        if (in.n_i < traffic_floor) {
            LdssEstimate est;
            est.stream = in.stream;
            est.interval = interval_index;
            est.writes = in.n_i;
            est.ldss = std::min(params.ldss_floor, static_cast<double>(in.n_i));
            est.unique_writes = static_cast<double>(in.n_i) - est.ldss;
            est.bypassed = true;
            o.estimate = est;
        } else {
            try {
                LdssEstimate est = estimate_ldss(in.ffh, in.n_i, p, params);
                est.stream = in.stream;
                est.interval = interval_index;
                o.estimate = est;
            } catch (const std::exception& e) {
                o.error = e.what();
            }
        }
        out.push_back(std::move(o));
    }
    return out;
}

}  // namespace dedup
