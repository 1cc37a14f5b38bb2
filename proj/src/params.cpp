#include "ips/params.hpp"

#include <cmath>

#include "ips/errors.hpp"
#include "ips/flp.hpp"

namespace ips {

PolicyParams policy_params(const Instance& instance, const DerivedConstants& constants, double delta,
                           int m, const Overrides& overrides) {
    if (!(delta > 0.0 && delta < std::exp(-1.0)))
        throw ConfigError("delta must lie in (0, 1/e) so that ln ln(1/delta) > 0");
    if (m < 1) throw ConfigError("m must be a positive integer");

    const double lg = std::log(1.0 / delta);
    const double lglg = std::log(lg);
    const int c_h = instance.n_labels();

    PolicyParams p;
    p.delta = delta;
    p.m = m;
    p.threshold_adapt = std::log(2.0 * c_h / delta);
    p.threshold_heuristic = std::log(c_h / delta);

    p.zeta0 = constants.zeta0;
    if (overrides.zeta0_scale) {
        p.zeta0 *= *overrides.zeta0_scale;
        p.overridden.push_back("zeta0_scale");
    }
    if (overrides.zeta0) {
        p.zeta0 = *overrides.zeta0;
        p.overridden.push_back("zeta0");
    }

    // Stage workloads are inspection counts; round the real-valued formulas
    // up (more inspections never hurt accuracy).
    p.n_prep = static_cast<int>(std::ceil(p.zeta0 * lglg));
    if (overrides.n_prep) {
        p.n_prep = *overrides.n_prep;
        p.overridden.push_back("n_prep");
    }
    p.n_resid = static_cast<int>(std::ceil(p.zeta0 * std::log(4.0 * c_h / delta)));
    if (overrides.n_resid) {
        p.n_resid = *overrides.n_resid;
        p.overridden.push_back("n_resid");
    }
    if (p.n_prep < 0 || p.n_resid < 0) throw ConfigError("stage workloads must be nonnegative");

    p.g_delta = g_delta_formula(constants.z_bar, constants.d_under, delta);
    if (overrides.g_delta) {
        p.g_delta = *overrides.g_delta;
        p.overridden.push_back("g_delta");
    }
    p.v_delta = v_delta_formula(constants.d_under, delta, c_h, p.g_delta);
    if (overrides.v_delta) {
        p.v_delta = *overrides.v_delta;
        p.overridden.push_back("v_delta");
    }

    double qp_num = p.n_prep + 1.0 / lg;
    if (overrides.qp_numerator) {
        qp_num = *overrides.qp_numerator;
        p.overridden.push_back("qp_numerator");
    }
    double qr_num = 3.0 * c_h * p.n_resid / lg + 1.0;
    if (overrides.qr_numerator) {
        qr_num = *overrides.qr_numerator;
        p.overridden.push_back("qr_numerator");
    }

    p.q_prep = qp_num / m;
    p.q_resid = qr_num / m;
    p.q_adapt = 1.0 - p.q_prep - p.q_resid;

    if (!(p.q_prep > 0.0 && p.q_prep < 1.0))
        throw InfeasibleRegime("q_prep = " + std::to_string(p.q_prep) + " outside (0,1) at m = " +
                               std::to_string(m));
    if (!(p.q_resid > 0.0 && p.q_resid < 1.0))
        throw InfeasibleRegime("q_resid = " + std::to_string(p.q_resid) + " outside (0,1) at m = " +
                               std::to_string(m));
    if (!(p.q_adapt > 0.0))
        throw InfeasibleRegime("q_prep + q_resid >= 1 at m = " + std::to_string(m) +
                               " (needs a larger system or overrides)");

    // The Adaptive workload LP must admit a feasible point for every label.
    for (int h = 0; h < c_h; ++h) {
        double need = min_total_workload(constants, h, p.evidence_requirement());
        if (need > p.v_delta + 1e-9)
            throw WorkloadLpInfeasible("workload LP infeasible for label " + instance.labels[h] +
                                       ": minimum total " + std::to_string(need) + " exceeds v_delta " +
                                       std::to_string(p.v_delta));
    }
    return p;
}

}  // namespace ips
