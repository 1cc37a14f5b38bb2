#include "ips/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ips/errors.hpp"

namespace ips {

namespace {

constexpr int kMaxIterations = 50000;

// Row-major dense tableau. Row `m_` is the reduced-cost row; column `ncols_`
// is the right-hand side.
class Tableau {
public:
    Tableau(int rows, int cols) : m_(rows), ncols_(cols), a_(static_cast<std::size_t>(rows + 1) * (cols + 1), 0.0) {}

    double& at(int i, int j) { return a_[static_cast<std::size_t>(i) * (ncols_ + 1) + j]; }
    double at(int i, int j) const { return a_[static_cast<std::size_t>(i) * (ncols_ + 1) + j]; }
    double& rhs(int i) { return at(i, ncols_); }
    double& cost(int j) { return at(m_, j); }

    void pivot(int r, int j) {
        const double p = at(r, j);
        const double inv = 1.0 / p;
        for (int c = 0; c <= ncols_; ++c) at(r, c) *= inv;
        at(r, j) = 1.0;
        for (int i = 0; i <= m_; ++i) {
            if (i == r) continue;
            const double f = at(i, j);
            if (f == 0.0) continue;
            for (int c = 0; c <= ncols_; ++c) at(i, c) -= f * at(r, c);
            at(i, j) = 0.0;
        }
    }

    int rows() const { return m_; }
    int cols() const { return ncols_; }

private:
    int m_, ncols_;
    std::vector<double> a_;
};

// Bland's rule: entering column is the lowest-index one with a negative
// reduced cost; leaving row is the min-ratio row, ties by lowest basic index.
// Returns Optimal when no entering column remains, Unbounded otherwise.
LpStatus run_simplex(Tableau& t, std::vector<int>& basis, int usable_cols) {
    int tiny_pivot_stalls = 0;
    for (int iter = 0; iter < kMaxIterations; ++iter) {
        int enter = -1;
        bool borderline = false;
        for (int j = 0; j < usable_cols; ++j) {
            double c = t.cost(j);
            if (c < -kLpPivotTol) {
                enter = j;
                break;
            }
            if (c < -1e-11) borderline = true;
        }
        if (enter < 0) {
            if (borderline && ++tiny_pivot_stalls > 32)
                throw NumericalInstability("reduced costs stuck between pivot tolerances");
            return LpStatus::Optimal;
        }

        int leave = -1;
        double best_ratio = std::numeric_limits<double>::infinity();
        for (int i = 0; i < t.rows(); ++i) {
            double aij = t.at(i, enter);
            if (aij > kLpPivotTol) {
                double ratio = t.rhs(i) / aij;
                if (ratio < best_ratio - 1e-12 ||
                    (ratio < best_ratio + 1e-12 && (leave < 0 || basis[i] < basis[leave]))) {
                    best_ratio = ratio;
                    leave = i;
                }
            }
        }
        if (leave < 0) return LpStatus::Unbounded;

        t.pivot(leave, enter);
        basis[leave] = enter;
    }
    throw NumericalInstability("simplex iteration cap exceeded");
}

}  // namespace

LpSolution solve_lp(const LpProblem& problem) {
    const int n_user = problem.n_vars();
    const int m = static_cast<int>(problem.rows.size());
    for (const auto& row : problem.rows) {
        if (static_cast<int>(row.coeffs.size()) != n_user)
            throw ConfigError("LP row width does not match objective");
        for (double v : row.coeffs)
            if (!std::isfinite(v)) throw ConfigError("LP coefficients must be finite");
        if (!std::isfinite(row.rhs)) throw ConfigError("LP bounds must be finite");
    }

    std::vector<bool> nonneg = problem.nonneg;
    if (nonneg.empty()) nonneg.assign(n_user, true);

    // Free variables split as x = u - w with u, w >= 0.
    std::vector<int> pos_col(n_user), neg_col(n_user, -1);
    int n = 0;
    for (int j = 0; j < n_user; ++j) {
        pos_col[j] = n++;
        if (!nonneg[j]) neg_col[j] = n++;
    }

    // Normalize rows to rhs >= 0; remember the flip for dual signs.
    std::vector<double> row_sign(m, 1.0);
    std::vector<RowSense> sense(m);
    std::vector<std::vector<double>> rowco(m, std::vector<double>(n, 0.0));
    std::vector<double> rhs(m);
    for (int i = 0; i < m; ++i) {
        const auto& row = problem.rows[i];
        double sgn = row.rhs < 0.0 ? -1.0 : 1.0;
        row_sign[i] = sgn;
        sense[i] = row.sense;
        if (sgn < 0.0) sense[i] = (row.sense == RowSense::Le) ? RowSense::Ge : RowSense::Le;
        for (int j = 0; j < n_user; ++j) {
            double v = sgn * row.coeffs[j];
            rowco[i][pos_col[j]] = v;
            if (neg_col[j] >= 0) rowco[i][neg_col[j]] = -v;
        }
        rhs[i] = sgn * row.rhs;
    }

    // Columns: structural | slack/surplus (one per row) | artificials (Ge rows).
    int n_art = 0;
    for (int i = 0; i < m; ++i)
        if (sense[i] == RowSense::Ge) ++n_art;
    const int slack0 = n;
    const int art0 = n + m;
    const int total_cols = n + m + n_art;

    Tableau t(m, total_cols);
    std::vector<int> basis(m, -1);
    int art = art0;
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) t.at(i, j) = rowco[i][j];
        t.rhs(i) = rhs[i];
        if (sense[i] == RowSense::Le) {
            t.at(i, slack0 + i) = 1.0;
            basis[i] = slack0 + i;
        } else {
            t.at(i, slack0 + i) = -1.0;
            t.at(i, art) = 1.0;
            basis[i] = art;
            ++art;
        }
    }

    // Phase 1: minimize the sum of artificials.
    if (n_art > 0) {
        for (int j = art0; j < total_cols; ++j) t.cost(j) = 1.0;
        for (int i = 0; i < m; ++i) {
            if (basis[i] >= art0) {
                for (int c = 0; c <= total_cols; ++c) t.at(m, c) -= t.at(i, c);
            }
        }
        LpStatus st = run_simplex(t, basis, total_cols);
        if (st != LpStatus::Optimal) throw NumericalInstability("phase 1 did not terminate at a vertex");
        double phase1 = -t.rhs(m);  // cost-row rhs holds the negated objective
        if (phase1 > kLpFeasTol) {
            LpSolution sol;
            sol.status = LpStatus::Infeasible;
            return sol;
        }
        // Drive any artificial still basic (at zero) out of the basis.
        for (int i = 0; i < m; ++i) {
            if (basis[i] < art0) continue;
            int enter = -1;
            for (int j = 0; j < art0; ++j) {
                if (std::abs(t.at(i, j)) > kLpPivotTol) {
                    enter = j;
                    break;
                }
            }
            if (enter >= 0) {
                t.pivot(i, enter);
                basis[i] = enter;
            }
            // else: redundant row; the artificial stays basic at zero and its
            // column is excluded from phase 2.
        }
    }

    // Phase 2: restore the true objective and price out the basis.
    for (int c = 0; c <= total_cols; ++c) t.at(m, c) = 0.0;
    for (int j = 0; j < n_user; ++j) {
        t.cost(pos_col[j]) = problem.objective[j];
        if (neg_col[j] >= 0) t.cost(neg_col[j]) = -problem.objective[j];
    }
    for (int i = 0; i < m; ++i) {
        int b = basis[i];
        double cb = t.cost(b);
        if (cb != 0.0) {
            for (int c = 0; c <= total_cols; ++c) t.at(m, c) -= cb * t.at(i, c);
        }
    }

    LpStatus st = run_simplex(t, basis, art0);  // artificials excluded
    LpSolution sol;
    sol.status = st;
    if (st != LpStatus::Optimal) return sol;

    std::vector<double> xcols(total_cols, 0.0);
    for (int i = 0; i < m; ++i) xcols[basis[i]] = t.rhs(i);

    sol.x.resize(n_user);
    for (int j = 0; j < n_user; ++j) {
        sol.x[j] = xcols[pos_col[j]];
        if (neg_col[j] >= 0) sol.x[j] -= xcols[neg_col[j]];
    }
    double value = 0.0;
    for (int j = 0; j < n_user; ++j) value += problem.objective[j] * sol.x[j];
    sol.value = value;

    // Duals from the slack/surplus reduced costs; undo row normalization.
    sol.duals.resize(m);
    for (int i = 0; i < m; ++i) {
        double rc = t.cost(slack0 + i);
        double y = (sense[i] == RowSense::Le) ? -rc : rc;
        sol.duals[i] = row_sign[i] * y;
    }
    for (int i = 0; i < m; ++i) {
        double lhs = 0.0;
        for (int j = 0; j < n_user; ++j) lhs += problem.rows[i].coeffs[j] * sol.x[j];
        double scale = 1.0 + std::abs(problem.rows[i].rhs);
        if (std::abs(lhs - problem.rows[i].rhs) <= 1e-7 * scale)
            sol.active_rows.push_back(i);
    }
    return sol;
}

}  // namespace ips
