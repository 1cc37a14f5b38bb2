#pragma once
#include <cstdint>
#include <vector>

#include "ips/instance.hpp"
#include "ips/params.hpp"
#include "ips/policy.hpp"
#include "ips/rng.hpp"

namespace ips {

// One outcome draw from p(h,k,.), inverse-CDF over the fixed alphabet order.
int sample_outcome(const Instance& instance, int h, int k, RngStream& rng);

struct EngineConfig {
    double horizon = 0.0;
    std::uint64_t seed = 0;
    int grid_points = 1000;  // time-series resolution
};

// What one replica produces: per-label counts, time-averaged series on the
// report grid, expert utilization, and a digest that pins the sample path.
struct SimReport {
    long long arrivals = 0;
    long long departures = 0;
    std::vector<long long> arrivals_by_label;
    std::vector<long long> departures_by_label;
    std::vector<long long> misclassified_by_label;
    std::vector<long long> residual_departures_by_label;
    std::vector<long long> residual_misclassified_by_label;
    long long residual_entries = 0;

    // Per-cell time averages; grid_time holds cell end times.
    std::vector<double> grid_time;
    std::vector<double> q_series, qp_series, qa_series, qr_series;
    std::vector<std::vector<double>> w_series;  // [k][cell], k = 0..c_K
    double final_q = 0.0;

    std::vector<double> inspect_fraction_by_type;  // share of horizon spent inspecting
    std::vector<double> vacation_fraction_by_type;
    std::vector<long long> inspections_by_type;
    std::vector<int> experts_by_type;

    double horizon = 0.0;
    int m = 0;
    std::uint64_t seed = 0;
    std::uint64_t determinism_digest = 0;
    bool heuristic_assumption_violated = false;
    double wall_clock_sec = 0.0;

    // time-average of Q over [from, to] fractions of the horizon
    double mean_q(double from_frac, double to_frac) const;
};

// Number of type-k experts: largest-remainder apportionment of rho_k * m.
// Throws ConfigError if some type would get no experts.
std::vector<int> apportion_experts(const Instance& instance, int m);

// Continuous-time event simulation: unit-rate Poisson arrivals, i.i.d. labels
// from pi, exponential busy times with mean 1/mu_k for inspections and
// vacations alike. Identical (instance, params, policy, horizon, seed) give a
// bitwise-identical report. `params` is required for the three-stage policy;
// the other policies only need `delta`.
SimReport run(const Instance& instance, const DerivedConstants& constants, PolicyKind policy,
              double delta, int m, const EngineConfig& config, const PolicyParams* params = nullptr);

}  // namespace ips
