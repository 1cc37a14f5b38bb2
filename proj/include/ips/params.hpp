#pragma once
#include <optional>
#include <string>
#include <vector>

#include "ips/instance.hpp"

namespace ips {

// Optional replacements for the derived policy constants. The defaults are
// the asymptotic formulas, which put feasible m in the thousands even at
// moderate delta; overrides make desk-scale experiments possible and are
// recorded in PolicyParams::overridden.
struct Overrides {
    std::optional<double> zeta0;        // absolute replacement
    std::optional<double> zeta0_scale;  // multiplier on the derived value
    std::optional<double> g_delta;
    std::optional<double> v_delta;
    std::optional<int> n_prep;
    std::optional<int> n_resid;
    std::optional<double> qp_numerator;
    std::optional<double> qr_numerator;

    bool any() const {
        return zeta0 || zeta0_scale || g_delta || v_delta || n_prep || n_resid ||
               qp_numerator || qr_numerator;
    }
};

// Everything the three-stage policy needs beyond the instance: stage
// workloads, visit probabilities, LP slack constants, and exit thresholds.
// Immutable after construction.
struct PolicyParams {
    double delta = 0.0;
    int m = 0;
    double zeta0 = 0.0;  // effective value after overrides
    int n_prep = 0;      // Preparation inspections per job
    int n_resid = 0;     // Residual inspections per job
    double g_delta = 0.0;
    double v_delta = 0.0;
    double q_prep = 0.0;
    double q_adapt = 0.0;
    double q_resid = 0.0;
    double threshold_adapt = 0.0;      // ln(2 c_H / delta)
    double threshold_heuristic = 0.0;  // ln(c_H / delta)
    std::vector<std::string> overridden;

    double evidence_requirement() const { return threshold_adapt + g_delta; }
};

// Builds the default policy constants for (delta, m), applying any
// overrides. The q numerators are built from the integer stage workloads so
// that m*q_prep > n_prep and m*q_resid > 3 c_H n_resid / ln(1/delta) hold by
// construction whenever the probabilities are feasible.
//
// Throws InfeasibleRegime when any visit probability leaves (0,1), and
// WorkloadLpInfeasible when the Adaptive workload LP has no feasible point
// for some label under the effective (g_delta, v_delta).
PolicyParams policy_params(const Instance& instance, const DerivedConstants& constants, double delta,
                           int m, const Overrides& overrides = {});

}  // namespace ips
