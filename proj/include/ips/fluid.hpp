#pragma once
#include <cstdint>
#include <span>
#include <vector>

#include "ips/flp.hpp"
#include "ips/instance.hpp"
#include "ips/params.hpp"

namespace ips {

// Inputs of the fluid dynamics beyond the instance: the coarse-estimate
// distribution pi^P and the effective stage service rates m q^P and m q^A
// (only these products enter the equations, so they are set directly).
struct FluidOptions {
    std::vector<double> pi_p;  // empty = use the prior
    double mq_prep = 0.0;
    double mq_adapt = 0.0;
    double horizon = 1.0;
    double dt = 1e-4;
    int scale_check_stride = 64;  // per-step scale-property assertion cadence; 0 = off
};

struct FluidTrajectory {
    std::vector<double> time;
    std::vector<std::vector<double>> states;  // w(t), size c_K+1 per point
    std::vector<double> lyapunov;             // L(w(t)) = ||w(t)||_2
    // selection record: per step, the pi_p-averaged LP optimum per type
    std::vector<std::vector<double>> selections;
    double max_drift = 0.0;        // max ||da/dt - dd/dt||_2 along the run
    bool nonincreasing = true;     // L monotone within 5*dt*(step drift)
    double max_increase = 0.0;     // worst tolerance-adjusted increase seen
};

// Explicit Euler with nonnegativity projection of the fluid dynamics:
//   da_0 = n_P                d d_0 = mq_prep        if w_0 > 0, else da_0
//   da_k = (1+1/ln(1/delta)) sum_h pi_p[h] n*_{h,k}(w)
//   d d_k = r_k mq_adapt      if w_k > 0, else da_k
// The LP selection n*_h(w) is the deterministic tie-broken optimum of the
// Adaptive workload LP with the current adaptive workloads as weights.
FluidTrajectory fluid_integrate(const Instance& instance, const DerivedConstants& constants,
                                const PolicyParams& params, const FluidOptions& options,
                                std::span<const double> w0);

struct ContractionSample {
    std::vector<double> w0;
    double min_lyapunov = 1.0;
    double time_of_min = 0.0;
    double lyapunov_at_tau = 1.0;
    bool nonincreasing = true;
    double max_drift = 0.0;  // empirical per-step drift magnitude along the run
};

struct ContractionReport {
    double mq_prep = 0.0;
    double mq_adapt = 0.0;
    double threshold_stability = 0.0;  // sufficient m q^A for stability
    double threshold_fluid = 0.0;     // with the (1+1/ln(1/delta)) factor
    bool threshold_met = false;       // mq_prep > n_P and mq_adapt > threshold
    int samples = 0;
    double tau = 0.0;        // earliest time every sample has dipped to 1-eps'
    double eps_prime = 0.0;  // 1 - max over samples of min_t L
    double max_l_at_tau = 1.0;
    bool certified = false;  // threshold_met and eps_prime > 0.01
    std::vector<ContractionSample> per_sample;
};

// Integrates from `samples` random unit-sphere initial conditions and checks
// the Lyapunov contraction L(w(tau)) <= 1 - eps'. Throws ThresholdNotMet when
// the stability-threshold precondition fails, unless report_only is set (then
// the run proceeds and the report carries threshold_met = false).
ContractionReport check_contraction(const Instance& instance, const DerivedConstants& constants,
                                    const PolicyParams& params, const FluidOptions& options,
                                    int samples, std::uint64_t seed, bool report_only = false);

}  // namespace ips
