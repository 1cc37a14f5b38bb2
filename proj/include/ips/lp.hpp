#pragma once
#include <vector>

namespace ips {

enum class LpStatus { Optimal, Infeasible, Unbounded };

enum class RowSense { Le, Ge };

struct LpRow {
    std::vector<double> coeffs;
    RowSense sense = RowSense::Le;
    double rhs = 0.0;
};

// Minimize objective . x subject to the inequality rows and per-variable
// nonnegativity flags (false = free variable, split internally).
struct LpProblem {
    std::vector<double> objective;
    std::vector<LpRow> rows;
    std::vector<bool> nonneg;  // empty means all nonnegative

    int n_vars() const { return static_cast<int>(objective.size()); }
};

struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    double value = 0.0;
    std::vector<double> x;
    std::vector<double> duals;     // one per row, reduced-cost convention for min
    std::vector<int> active_rows;  // rows binding at the returned vertex
};

inline constexpr double kLpPivotTol = 1e-9;
inline constexpr double kLpFeasTol = 1e-8;

// Dense two-phase tableau simplex with Bland's anti-cycling pivot rule.
// Deterministic for identical inputs; optimal solutions are vertices.
// Throws NumericalInstability if pivoting degenerates.
LpSolution solve_lp(const LpProblem& problem);

}  // namespace ips
