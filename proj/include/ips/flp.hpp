#pragma once
#include <span>
#include <vector>

#include "ips/instance.hpp"
#include "ips/lp.hpp"
#include "ips/params.hpp"

namespace ips {

// Solution of the Fundamental Linear Program: the informed-decision-maker
// capacity benchmark m*_F and the per-(label,type) inspection allocation.
struct FlpResult {
    double m_star_f = 0.0;
    std::vector<double> allocation;  // n*_{h,k}, flattened [h][k]
    double delta = 0.0;
    std::vector<double> prior;
    int n_types = 0;

    // Whether every per-label total also stays below ln(1/delta)/d_under.
    // A generic vertex optimum need not satisfy it, so it is reported, not
    // asserted.
    bool totals_within_d_under = true;

    double alloc(int h, int k) const {
        return allocation[static_cast<std::size_t>(h) * n_types + k];
    }
};

// minimize m  s.t.  sum_h n_{h,k} pi_h <= r_k m   for all k
//                   sum_k n_{h,k} D(h,l,k) >= ln(1/delta)  for all h != l
//                   n >= 0
// The result is checked against the structural bounds it must satisfy
// (capacity/evidence feasibility and m*_F >= ln(1/delta)/d_bar).
FlpResult solve_flp(const Instance& instance, const DerivedConstants& constants, double delta);

// High-accuracy multiplier b_delta and the induced lower bound on any
// delta-accurate policy's minimum system size.
double b_delta(double delta);
double lower_bound(double delta, double m_star_f);

// Adaptive-stage workload vector for a job with coarse estimate h: the
// deterministic tie-broken optimum of the workload LP under `weights`, and
// its coordinatewise floor.
struct WorkloadVector {
    std::vector<double> pre_floor;  // LP solution n_{h,k}
    std::vector<int> lambda;        // floor(pre_floor)
    long long total() const {
        long long t = 0;
        for (int v : lambda) t += v;
        return t;
    }
};

// Minimizes sum_k n_k W_k over N_h; ties broken by minimizing sum_k n_k and
// then lexicographically. Weights are normalized by their maximum before
// solving so the selected optimum is invariant under positive scaling.
WorkloadVector workload_vector(const Instance& instance, const DerivedConstants& constants,
                               const PolicyParams& params, int h, std::span<const double> weights);

// Smallest total sum_k n_k able to satisfy the per-pair evidence rows for
// label h at the given right-hand side; the workload LP is feasible iff this
// is <= v_delta.
double min_total_workload(const DerivedConstants& constants, int h, double evidence_rhs);

// Sufficient Adaptive service rate m q^A for joint stability of the
// Preparation and Adaptive stages. The fluid-contraction variant additionally
// carries the (1 + 1/ln(1/delta)) arrival inflation of the fluid dynamics.
double adaptive_stability_threshold(const DerivedConstants& constants, const PolicyParams& params,
                                   double m_star_f);
double fluid_contraction_threshold(const DerivedConstants& constants, const PolicyParams& params,
                                   double m_star_f);

}  // namespace ips
