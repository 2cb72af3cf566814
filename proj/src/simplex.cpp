#include "simplex.hpp"

#include <cmath>
#include <cstddef>
#include <limits>

#include "errors.hpp"

namespace dedup {

namespace {

constexpr double kPivotEps = 1e-9;
constexpr double kCostEps = 1e-9;
constexpr double kFeasEps = 1e-7;

struct Tableau {
    size_t rows, cols;                    // constraint rows, variable columns
    std::vector<std::vector<double>> t;   // rows x (cols+1), last column = rhs
    std::vector<double> obj;              // cols+1, last = -objective value
    std::vector<size_t> basis;            // basis[r] = column basic in row r

    void pivot(size_t pr, size_t pc) {
        double inv = 1.0 / t[pr][pc];
        for (auto& v : t[pr]) v *= inv;
        t[pr][pc] = 1.0;  // kill roundoff
        for (size_t r = 0; r < rows; ++r) {
            if (r == pr) continue;
            double f = t[r][pc];
            if (std::abs(f) < kPivotEps) {
                t[r][pc] = 0.0;
                continue;
            }
            for (size_t c = 0; c <= cols; ++c) t[r][c] -= f * t[pr][c];
            t[r][pc] = 0.0;
        }
        double f = obj[pc];
        if (std::abs(f) > 0) {
            for (size_t c = 0; c <= cols; ++c) obj[c] -= f * t[pr][c];
            obj[pc] = 0.0;
        }
        basis[pr] = pc;
    }

    // Bland's rule keeps the iteration count finite under degeneracy.
    bool iterate(size_t col_limit) {
        while (true) {
            size_t pc = cols;
            for (size_t c = 0; c < col_limit; ++c) {
                if (obj[c] < -kCostEps) {
                    pc = c;
                    break;
                }
            }
            if (pc == cols) return true;  // optimal
            size_t pr = rows;
            double best = std::numeric_limits<double>::infinity();
            for (size_t r = 0; r < rows; ++r) {
                if (t[r][pc] > kPivotEps) {
                    double ratio = t[r][cols] / t[r][pc];
                    if (ratio < best - kPivotEps ||
                        (ratio < best + kPivotEps && (pr == rows || basis[r] < basis[pr]))) {
                        best = ratio;
                        pr = r;
                    }
                }
            }
            if (pr == rows) return false;  // unbounded
            pivot(pr, pc);
        }
    }
};

}  // namespace

LpResult solve_lp(std::vector<std::vector<double>> a, std::vector<double> b,
                  std::vector<double> c) {
    const size_t m = a.size();
    const size_t n = c.size();
    for (size_t r = 0; r < m; ++r) {
        if (a[r].size() != n) throw EstimationError("lp: matrix shape mismatch");
        if (b[r] < 0) {
            for (auto& v : a[r]) v = -v;
            b[r] = -b[r];
        }
    }

    Tableau tb;
    tb.rows = m;
    tb.cols = n + m;  // artificials appended
    tb.t.assign(m, std::vector<double>(tb.cols + 1, 0.0));
    tb.basis.resize(m);
    for (size_t r = 0; r < m; ++r) {
        for (size_t cidx = 0; cidx < n; ++cidx) tb.t[r][cidx] = a[r][cidx];
        tb.t[r][n + r] = 1.0;
        tb.t[r][tb.cols] = b[r];
        tb.basis[r] = n + r;
    }

    // phase 1: minimize the artificial sum
    tb.obj.assign(tb.cols + 1, 0.0);
    for (size_t r = 0; r < m; ++r)
        for (size_t cidx = 0; cidx <= tb.cols; ++cidx)
            if (cidx < n || cidx == tb.cols) tb.obj[cidx] -= tb.t[r][cidx];
    if (!tb.iterate(tb.cols)) throw EstimationError("lp: phase-1 unbounded");
    double infeas = -tb.obj[tb.cols];
    if (infeas > kFeasEps) throw EstimationError("lp: infeasible (residual " +
                                                 std::to_string(infeas) + ")");

    // drive remaining artificials out of the basis
    for (size_t r = 0; r < m; ++r) {
        if (tb.basis[r] < n) continue;
        size_t pc = n;
        for (size_t cidx = 0; cidx < n; ++cidx) {
            if (std::abs(tb.t[r][cidx]) > kPivotEps) {
                pc = cidx;
                break;
            }
        }
        if (pc < n) tb.pivot(r, pc);
        // else: redundant row; leaving the artificial basic at value 0 is harmless
    }

    // phase 2 objective over the original columns
    tb.obj.assign(tb.cols + 1, 0.0);
    for (size_t cidx = 0; cidx < n; ++cidx) tb.obj[cidx] = c[cidx];
    for (size_t r = 0; r < m; ++r) {
        if (tb.basis[r] >= n) continue;
        double f = tb.obj[tb.basis[r]];
        if (f == 0.0) continue;
        for (size_t cidx = 0; cidx <= tb.cols; ++cidx) tb.obj[cidx] -= f * tb.t[r][cidx];
        tb.obj[tb.basis[r]] = 0.0;
    }
    if (!tb.iterate(n)) throw EstimationError("lp: unbounded objective");

    LpResult res;
    res.x.assign(n, 0.0);
    for (size_t r = 0; r < m; ++r)
        if (tb.basis[r] < n) res.x[tb.basis[r]] = tb.t[r][tb.cols];
    res.objective = -tb.obj[tb.cols];
    return res;
}

}  // namespace dedup
