#pragma once

#include <vector>

namespace dedup {

struct LpResult {
    std::vector<double> x;
    double objective = 0;
};

// Solves  min c.x  subject to  A x = b, x >= 0  with a dense two-phase
// primal simplex (Bland's rule). Problem sizes here stay tiny (tens of rows,
// ~200 columns). Throws EstimationError when infeasible or unbounded.
LpResult solve_lp(std::vector<std::vector<double>> a, std::vector<double> b,
                  std::vector<double> c);

}  // namespace dedup
