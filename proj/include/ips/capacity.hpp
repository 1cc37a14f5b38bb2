#pragma once
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ips/engine.hpp"
#include "ips/flp.hpp"
#include "ips/instance.hpp"
#include "ips/params.hpp"
#include "ips/policy.hpp"

namespace ips {

enum class Stability { Stable, Unstable, Inconclusive };

std::string to_string(Stability verdict);

struct ReplicaDiagnostics {
    std::uint64_t seed = 0;
    double slope = 0.0;
    double mean_q = 0.0;
    double middle_third_mean = 0.0;
    double final_third_mean = 0.0;
    double final_q = 0.0;
    bool slope_ok = false, ratio_ok = false, endpoint_ok = false;
    bool stable = false;
};

// Empirical proxy for positive recurrence: per replica the Q(t) trend slope,
// a middle-vs-final-third mean comparison, and an endpoint sanity bound;
// aggregated across replicas with `inconclusive` as the honest third state.
struct StabilityVerdict {
    Stability verdict = Stability::Inconclusive;
    std::vector<ReplicaDiagnostics> replicas;
};

inline constexpr double kDefaultSlopeTol = 1e-3;

StabilityVerdict detect_stability(std::span<const SimReport> reports, double warmup_frac,
                                  double slope_tol = kDefaultSlopeTol);

struct CapacitySettings {
    int replicas = 5;
    double horizon = 2e4;
    double warmup_frac = 0.1;
    int grid_points = 1000;
    double slope_tol = kDefaultSlopeTol;
    std::uint64_t seed = 0;
    bool verify_bracket = false;
};

struct EvaluationRecord {
    int m = 0;
    Stability verdict = Stability::Inconclusive;
    bool infeasible = false;  // policy constants infeasible at this m
    StabilityVerdict detail;
};

struct CapacityResult {
    int m_psi = 0;
    double m_star_f = 0.0;
    double b_delta_value = 0.0;
    double ratio = 0.0;  // m_psi / (b_delta * m_star_f)
    double delta = 0.0;
    PolicyKind policy = PolicyKind::Oracle;
    CapacitySettings settings;
    Overrides overrides;
    std::vector<EvaluationRecord> evaluations;

    // Residual service-rate condition, checked on stable three-stage runs.
    bool residual_rate_checked = false;
    bool residual_rate_ok = true;
    double residual_rate_lhs = 0.0;  // (entries/T) * n_resid
    double residual_rate_rhs = 0.0;  // m * q_resid

    std::vector<std::string> warnings;
};

// Integer bisection for the smallest m judged stable, assuming stability is
// monotone in m (optionally spot-checked post hoc). Throws RangeError when
// [m_lo, m_hi] does not bracket: m_lo stable or m_hi not stable.
CapacityResult min_stable_m(const Instance& instance, const DerivedConstants& constants, double delta,
                            PolicyKind policy, const Overrides& overrides, int m_lo, int m_hi,
                            const CapacitySettings& settings);

struct PrepErrorReport {
    int n_prep = 0;
    long long samples = 0;
    std::vector<long long> per_label_count, per_label_errors;
    std::vector<double> per_label_rate, per_label_wilson_upper;
    double epsilon_max = 0.0;       // max_h empirical P(coarse != h | h)
    double wilson_upper_max = 0.0;  // max_h one-sided 99% Wilson upper bound
    double epsilon_overall = 0.0;   // empirical P(coarse != truth)
    double bound = 0.0;             // 2 c_H / ln(1/delta)
    std::vector<double> pi_p;       // empirical coarse-estimate distribution
};

// Monte Carlo estimate of the Preparation-stage coarse error: isolated jobs,
// each inspected n_prep times by types drawn i.i.d. from r.
PrepErrorReport estimate_prep_error(const Instance& instance, const DerivedConstants& constants,
                                    double delta, long long samples, std::uint64_t seed,
                                    std::optional<int> n_prep_override = std::nullopt);

struct SweepRow {
    double delta = 0.0;
    int m_psi = 0;
    double m_star_f = 0.0;
    double b_delta_value = 0.0;
    double ratio = 0.0;
    double envelope = 0.0;  // 1 + c0 sqrt(lnln(1/delta)/ln(1/delta))
    std::string error;      // nonempty when this row failed
};

struct SweepResult {
    std::vector<SweepRow> rows;
    double c0 = 0.0;
};

// Runs min_stable_m per delta; per-row failures are recorded and the sweep
// continues.
SweepResult sweep(const Instance& instance, const DerivedConstants& constants, PolicyKind policy,
                  const Overrides& overrides, std::span<const double> deltas, int m_lo, int m_hi,
                  const CapacitySettings& settings, double c0);

// One-sided upper Wilson confidence bound for a binomial proportion.
double wilson_upper(long long errors, long long n, double z = 2.3263478740408408);

// One-sided binomial consistency check at confidence z: passes when the
// observed count does not exceed n*p0 by more than z standard deviations.
bool binomial_upper_ok(long long count, long long n, double p0, double z = 2.3263478740408408);

}  // namespace ips
