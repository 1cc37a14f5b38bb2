#include "ips/flp.hpp"

#include <algorithm>
#include <cmath>

#include "ips/errors.hpp"

namespace ips {

FlpResult solve_flp(const Instance& instance, const DerivedConstants& constants, double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0,1)");
    const int c_h = instance.n_labels();
    const int c_k = instance.n_types();
    const double lg = std::log(1.0 / delta);

    // variables: n_{h,k} (h-major), then m
    const int n_vars = c_h * c_k + 1;
    LpProblem lp;
    lp.objective.assign(n_vars, 0.0);
    lp.objective[n_vars - 1] = 1.0;

    for (int k = 0; k < c_k; ++k) {
        LpRow row;
        row.coeffs.assign(n_vars, 0.0);
        for (int h = 0; h < c_h; ++h) row.coeffs[h * c_k + k] = instance.prior[h];
        row.coeffs[n_vars - 1] = -constants.r[k];
        row.sense = RowSense::Le;
        row.rhs = 0.0;
        lp.rows.push_back(std::move(row));
    }
    for (int h = 0; h < c_h; ++h) {
        for (int l = 0; l < c_h; ++l) {
            if (l == h) continue;
            LpRow row;
            row.coeffs.assign(n_vars, 0.0);
            for (int k = 0; k < c_k; ++k) row.coeffs[h * c_k + k] = constants.kl(h, l, k);
            row.sense = RowSense::Ge;
            row.rhs = lg;
            lp.rows.push_back(std::move(row));
        }
    }

    LpSolution sol = solve_lp(lp);
    if (sol.status != LpStatus::Optimal)
        throw NumericalInstability("FLP did not solve to optimality on a valid instance");

    FlpResult res;
    res.m_star_f = sol.x[n_vars - 1];
    res.allocation.assign(sol.x.begin(), sol.x.end() - 1);
    res.delta = delta;
    res.prior = instance.prior;
    res.n_types = c_k;

    // Structural checks the optimum must satisfy.
    for (int k = 0; k < c_k; ++k) {
        double load = 0.0;
        for (int h = 0; h < c_h; ++h) load += res.alloc(h, k) * instance.prior[h];
        if (load > constants.r[k] * res.m_star_f + 1e-8)
            throw NumericalInstability("FLP capacity row violated at optimum");
    }
    for (int h = 0; h < c_h; ++h) {
        double total = 0.0;
        for (int k = 0; k < c_k; ++k) total += res.alloc(h, k);
        if (total / lg < 1.0 / constants.d_bar - 1e-8)
            throw NumericalInstability("FLP evidence total below the d_bar floor");
        if (total / lg > 1.0 / constants.d_under + 1e-8) res.totals_within_d_under = false;
        for (int l = 0; l < c_h; ++l) {
            if (l == h) continue;
            double ev = 0.0;
            for (int k = 0; k < c_k; ++k) ev += res.alloc(h, k) * constants.kl(h, l, k);
            if (ev < lg - 1e-8)
                throw NumericalInstability("FLP evidence row violated at optimum");
        }
    }
    if (res.m_star_f < lg / constants.d_bar - 1e-8)
        throw NumericalInstability("FLP optimum below the ln(1/delta)/d_bar bound");

    return res;
}

double b_delta(double delta) {
    double lg = std::log(1.0 / delta);
    return (1.0 - delta) * (1.0 - (std::log(1.0 / (1.0 - delta)) + std::exp(-1.0)) / lg);
}

double lower_bound(double delta, double m_star_f) { return b_delta(delta) * m_star_f; }

namespace {

// Feasible set N_h: evidence rows, the v_delta budget, n >= 0.
LpProblem workload_base(const DerivedConstants& constants, const PolicyParams& params, int h) {
    const int c_k = constants.n_types;
    LpProblem lp;
    lp.objective.assign(c_k, 0.0);
    for (int l = 0; l < constants.n_labels; ++l) {
        if (l == h) continue;
        LpRow row;
        row.coeffs.resize(c_k);
        for (int k = 0; k < c_k; ++k) row.coeffs[k] = constants.kl(h, l, k);
        row.sense = RowSense::Ge;
        row.rhs = params.evidence_requirement();
        lp.rows.push_back(std::move(row));
    }
    LpRow budget;
    budget.coeffs.assign(c_k, 1.0);
    budget.sense = RowSense::Le;
    budget.rhs = params.v_delta;
    lp.rows.push_back(std::move(budget));
    return lp;
}

}  // namespace

double min_total_workload(const DerivedConstants& constants, int h, double evidence_rhs) {
    const int c_k = constants.n_types;
    LpProblem lp;
    lp.objective.assign(c_k, 1.0);
    for (int l = 0; l < constants.n_labels; ++l) {
        if (l == h) continue;
        LpRow row;
        row.coeffs.resize(c_k);
        for (int k = 0; k < c_k; ++k) row.coeffs[k] = constants.kl(h, l, k);
        row.sense = RowSense::Ge;
        row.rhs = evidence_rhs;
        lp.rows.push_back(std::move(row));
    }
    LpSolution sol = solve_lp(lp);
    if (sol.status != LpStatus::Optimal)
        throw NumericalInstability("unbudgeted workload LP failed to solve");
    return sol.value;
}

WorkloadVector workload_vector(const Instance& instance, const DerivedConstants& constants,
                               const PolicyParams& params, int h, std::span<const double> weights) {
    const int c_k = instance.n_types();
    if (static_cast<int>(weights.size()) != c_k) throw ConfigError("weight vector has wrong length");

    // Normalize by the max weight: the optimal set is scale-invariant, and
    // normalizing makes the selected vertex independent of positive scaling.
    std::vector<double> w(weights.begin(), weights.end());
    double wmax = 0.0;
    for (double v : w) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("weights must be finite and nonnegative");
        wmax = std::max(wmax, v);
    }
    if (wmax > 0.0)
        for (double& v : w) v /= wmax;

    LpProblem lp = workload_base(constants, params, h);

    // Stage 1: minimize the weighted inspection load.
    double v1 = 0.0;
    if (wmax > 0.0) {
        lp.objective = w;
        LpSolution s1 = solve_lp(lp);
        if (s1.status == LpStatus::Infeasible)
            throw WorkloadLpInfeasible("workload LP infeasible for label " + instance.labels[h]);
        if (s1.status != LpStatus::Optimal)
            throw NumericalInstability("workload LP stage 1 did not reach a vertex");
        v1 = s1.value;
        LpRow cap;
        cap.coeffs = w;
        cap.sense = RowSense::Le;
        cap.rhs = v1 + 1e-9 * (1.0 + std::abs(v1));
        lp.rows.push_back(std::move(cap));
    }

    // Stage 2: among stage-1 optima, minimize total inspections.
    lp.objective.assign(c_k, 1.0);
    LpSolution s2 = solve_lp(lp);
    if (s2.status == LpStatus::Infeasible)
        throw WorkloadLpInfeasible("workload LP infeasible for label " + instance.labels[h]);
    if (s2.status != LpStatus::Optimal)
        throw NumericalInstability("workload LP stage 2 did not reach a vertex");
    {
        LpRow cap;
        cap.coeffs.assign(c_k, 1.0);
        cap.sense = RowSense::Le;
        cap.rhs = s2.value + 1e-9 * (1.0 + std::abs(s2.value));
        lp.rows.push_back(std::move(cap));
    }

    // Stage 3: lexicographic minimum over the remaining optimal face.
    LpSolution last = s2;
    for (int k = 0; k < c_k; ++k) {
        lp.objective.assign(c_k, 0.0);
        lp.objective[k] = 1.0;
        LpSolution sk = solve_lp(lp);
        if (sk.status != LpStatus::Optimal)
            throw NumericalInstability("workload LP lexicographic stage failed");
        last = sk;
        LpRow cap;
        cap.coeffs.assign(c_k, 0.0);
        cap.coeffs[k] = 1.0;
        cap.sense = RowSense::Le;
        cap.rhs = sk.x[k] + 1e-9 * (1.0 + std::abs(sk.x[k]));
        lp.rows.push_back(std::move(cap));
    }

    WorkloadVector out;
    out.pre_floor = last.x;
    out.lambda.resize(c_k);
    for (int k = 0; k < c_k; ++k) {
        double v = std::max(0.0, out.pre_floor[k]);
        out.pre_floor[k] = v;
        out.lambda[k] = static_cast<int>(std::floor(v + 1e-9));
    }
    return out;
}

double adaptive_stability_threshold(const DerivedConstants& constants, const PolicyParams& params,
                                   double m_star_f) {
    const double lg = std::log(1.0 / params.delta);
    const double c_h = constants.n_labels;
    double f1 = 1.0 + (std::log(2.0 * c_h) + params.g_delta) / lg;
    double f2 = 1.0 + 2.0 * c_h * c_h * constants.d_bar / (constants.d_under * constants.r_min() * lg);
    return f1 * f2 * m_star_f;
}

double fluid_contraction_threshold(const DerivedConstants& constants, const PolicyParams& params,
                                   double m_star_f) {
    const double lg = std::log(1.0 / params.delta);
    return adaptive_stability_threshold(constants, params, m_star_f) * (1.0 + 1.0 / lg);
}

}  // namespace ips
