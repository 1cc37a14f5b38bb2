#include "ips/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <future>

#include "ips/errors.hpp"
#include "ips/rng.hpp"

namespace ips {

std::string to_string(Stability verdict) {
    switch (verdict) {
        case Stability::Stable: return "stable";
        case Stability::Unstable: return "unstable";
        case Stability::Inconclusive: return "inconclusive";
    }
    return "?";
}

namespace {

double series_mean(std::span<const double> v, std::size_t lo, std::size_t hi) {
    hi = std::min(hi, v.size());
    if (lo >= hi) return 0.0;
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += v[i];
    return s / static_cast<double>(hi - lo);
}

}  // namespace

StabilityVerdict detect_stability(std::span<const SimReport> reports, double warmup_frac,
                                  double slope_tol) {
    if (reports.empty()) throw ConfigError("no reports to judge");
    if (warmup_frac < 0.0 || warmup_frac > 0.1)
        throw InsufficientHorizon("horizon must be at least 10x the warmup window");

    StabilityVerdict out;
    int stable_count = 0, unstable_count = 0;
    for (const SimReport& rep : reports) {
        if (!(rep.horizon > 0.0)) throw InsufficientHorizon("report has zero horizon");
        const auto& q = rep.q_series;
        const std::size_t n = q.size();
        const std::size_t lo = static_cast<std::size_t>(warmup_frac * n);

        ReplicaDiagnostics d;
        d.seed = rep.seed;
        d.mean_q = series_mean(q, lo, n);
        d.final_q = rep.final_q;

        // Least-squares slope of Q against time over the post-warmup cells.
        double tm = 0.0, qm = 0.0;
        std::size_t cnt = n - lo;
        for (std::size_t i = lo; i < n; ++i) {
            tm += rep.grid_time[i];
            qm += q[i];
        }
        tm /= cnt;
        qm /= cnt;
        double sxx = 0.0, sxy = 0.0;
        for (std::size_t i = lo; i < n; ++i) {
            double dx = rep.grid_time[i] - tm;
            sxx += dx * dx;
            sxy += dx * (q[i] - qm);
        }
        d.slope = sxx > 0.0 ? sxy / sxx : 0.0;

        std::size_t third = (n - lo) / 3;
        d.middle_third_mean = series_mean(q, lo + third, lo + 2 * third);
        d.final_third_mean = series_mean(q, lo + 2 * third, n);

        d.slope_ok = d.slope <= slope_tol * d.mean_q + 1e-12;
        d.ratio_ok = d.final_third_mean <= 1.1 * d.middle_third_mean + 1e-9;
        d.endpoint_ok = d.final_q <= 5.0 * d.mean_q + 1e-9;
        d.stable = d.slope_ok && d.ratio_ok && d.endpoint_ok;
        if (d.stable)
            ++stable_count;
        else
            ++unstable_count;
        out.replicas.push_back(d);
    }
    if (stable_count == static_cast<int>(reports.size()))
        out.verdict = Stability::Stable;
    else if (unstable_count == static_cast<int>(reports.size()))
        out.verdict = Stability::Unstable;
    else
        out.verdict = Stability::Inconclusive;
    return out;
}

namespace {

// Runs the replica set for one m, in parallel, with per-(m, replica) seeds.
std::vector<SimReport> run_replicas(const Instance& instance, const DerivedConstants& constants,
                                    PolicyKind policy, double delta, int m,
                                    const PolicyParams* params, const CapacitySettings& s) {
    std::vector<std::future<SimReport>> futs;
    futs.reserve(s.replicas);
    for (int r = 0; r < s.replicas; ++r) {
        EngineConfig cfg;
        cfg.horizon = s.horizon;
        cfg.grid_points = s.grid_points;
        cfg.seed = derive_seed(s.seed, static_cast<std::uint64_t>(m), r);
        futs.push_back(std::async(std::launch::async, [&, cfg]() {
            return run(instance, constants, policy, delta, m, cfg, params);
        }));
    }
    std::vector<SimReport> reports;
    reports.reserve(s.replicas);
    for (auto& f : futs) reports.push_back(f.get());
    return reports;
}

}  // namespace

CapacityResult min_stable_m(const Instance& instance, const DerivedConstants& constants, double delta,
                            PolicyKind policy, const Overrides& overrides, int m_lo, int m_hi,
                            const CapacitySettings& settings) {
    if (m_lo >= m_hi) throw RangeError("m_lo must be smaller than m_hi");

    CapacityResult res;
    res.delta = delta;
    res.policy = policy;
    res.settings = settings;
    res.overrides = overrides;

    FlpResult flp = solve_flp(instance, constants, delta);
    res.m_star_f = flp.m_star_f;
    res.b_delta_value = b_delta(delta);

    // Preconditions at the top of the bracket: the policy must be runnable at
    // m_hi; smaller m may be infeasible and then counts as not stable.
    (void)apportion_experts(instance, m_hi);
    if (policy == PolicyKind::ThreeStage)
        (void)policy_params(instance, constants, delta, m_hi, overrides);

    auto evaluate = [&](int m) -> EvaluationRecord {
        EvaluationRecord rec;
        rec.m = m;
        PolicyParams params;
        const PolicyParams* pp = nullptr;
        try {
            (void)apportion_experts(instance, m);
            if (policy == PolicyKind::ThreeStage) {
                params = policy_params(instance, constants, delta, m, overrides);
                pp = &params;
            }
        } catch (const InfeasibleRegime&) {
            rec.infeasible = true;
            rec.verdict = Stability::Unstable;  // cannot run, cannot stabilize
            return rec;
        } catch (const ConfigError&) {
            rec.infeasible = true;
            rec.verdict = Stability::Unstable;
            return rec;
        }
        std::vector<SimReport> reports =
            run_replicas(instance, constants, policy, delta, m, pp, settings);
        rec.detail = detect_stability(reports, settings.warmup_frac, settings.slope_tol);
        rec.verdict = rec.detail.verdict;

        if (policy == PolicyKind::ThreeStage && rec.verdict == Stability::Stable) {
            double entries = 0.0;
            for (const auto& r : reports) entries += static_cast<double>(r.residual_entries);
            double rate = entries / (settings.replicas * settings.horizon);
            res.residual_rate_checked = true;
            res.residual_rate_lhs = rate * params.n_resid;
            res.residual_rate_rhs = m * params.q_resid;
            if (res.residual_rate_lhs > 1.2 * res.residual_rate_rhs) {
                res.residual_rate_ok = false;
                res.warnings.push_back("Residual rate condition violated at m = " + std::to_string(m));
            }
        }
        return rec;
    };

    EvaluationRecord lo_rec = evaluate(m_lo);
    res.evaluations.push_back(lo_rec);
    if (lo_rec.verdict == Stability::Stable)
        throw RangeError("m_lo = " + std::to_string(m_lo) + " is already stable; range does not bracket");
    EvaluationRecord hi_rec = evaluate(m_hi);
    res.evaluations.push_back(hi_rec);
    if (hi_rec.verdict != Stability::Stable)
        throw RangeError("m_hi = " + std::to_string(m_hi) + " is not stable; range does not bracket");

    int lo = m_lo, hi = m_hi;
    while (hi - lo > 1) {
        int mid = lo + (hi - lo) / 2;
        EvaluationRecord rec = evaluate(mid);
        res.evaluations.push_back(rec);
        if (rec.verdict == Stability::Stable)
            hi = mid;
        else
            lo = mid;  // unstable and inconclusive both push the bracket up
    }
    res.m_psi = hi;
    res.ratio = res.m_psi / (res.b_delta_value * res.m_star_f);

    if (settings.verify_bracket) {
        CapacitySettings shifted = settings;
        shifted.seed = derive_seed(settings.seed, 0x5EED, 1);
        auto verify = [&](int m, Stability expect) {
            PolicyParams params;
            const PolicyParams* pp = nullptr;
            try {
                (void)apportion_experts(instance, m);
                if (policy == PolicyKind::ThreeStage) {
                    params = policy_params(instance, constants, delta, m, overrides);
                    pp = &params;
                }
            } catch (const Error&) {
                return;  // infeasible stays "not stable"
            }
            auto reports = run_replicas(instance, constants, policy, delta, m, pp, shifted);
            auto verdict = detect_stability(reports, shifted.warmup_frac, shifted.slope_tol).verdict;
            if (verdict != expect)
                res.warnings.push_back("post-hoc check at m = " + std::to_string(m) + " gave " +
                                       to_string(verdict) + ", expected " + to_string(expect));
        };
        verify(res.m_psi, Stability::Stable);
        if (res.m_psi - 1 >= m_lo) verify(res.m_psi - 1, Stability::Unstable);
        int interior = res.m_psi + (m_hi - res.m_psi) / 2;
        if (interior > res.m_psi && interior < m_hi) verify(interior, Stability::Stable);
    }
    return res;
}

double wilson_upper(long long errors, long long n, double z) {
    if (n <= 0) return 1.0;
    double phat = static_cast<double>(errors) / n;
    double z2 = z * z;
    double denom = 1.0 + z2 / n;
    double center = phat + z2 / (2.0 * n);
    double rad = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n));
    return std::min(1.0, (center + rad) / denom);
}

bool binomial_upper_ok(long long count, long long n, double p0, double z) {
    double mean = n * p0;
    double sd = std::sqrt(n * p0 * (1.0 - p0));
    return count <= mean + z * sd;
}

PrepErrorReport estimate_prep_error(const Instance& instance, const DerivedConstants& constants,
                                    double delta, long long samples, std::uint64_t seed,
                                    std::optional<int> n_prep_override) {
    if (samples < 1000) throw ConfigError("estimate_prep_error needs at least 1000 samples");
    const int c_h = instance.n_labels();

    PrepErrorReport rep;
    rep.samples = samples;
    rep.n_prep = n_prep_override
                     ? *n_prep_override
                     : static_cast<int>(std::ceil(constants.zeta0 * std::log(std::log(1.0 / delta))));
    if (rep.n_prep < 0) throw ConfigError("n_prep must be nonnegative");
    rep.bound = 2.0 * c_h / std::log(1.0 / delta);
    rep.per_label_count.assign(c_h, 0);
    rep.per_label_errors.assign(c_h, 0);
    rep.pi_p.assign(c_h, 0.0);

    RngStream label_rng(seed, "prep_label");
    RngStream type_rng(seed, "prep_type");
    RngStream outcome_rng(seed, "prep_outcome");

    long long wrong = 0;
    for (long long i = 0; i < samples; ++i) {
        int truth = label_rng.next_categorical(instance.prior);
        LlrState llr(c_h);
        for (int j = 0; j < rep.n_prep; ++j) {
            int k = type_rng.next_categorical(constants.r);
            int x = outcome_rng.next_categorical(instance.outcome_dist(truth, k));
            llr_update_inplace(llr, instance, InspectionRecord{k, x});
        }
        int estimate = ml_estimate(llr);
        ++rep.per_label_count[truth];
        rep.pi_p[estimate] += 1.0;
        if (estimate != truth) {
            ++rep.per_label_errors[truth];
            ++wrong;
        }
    }

    rep.per_label_rate.assign(c_h, 0.0);
    rep.per_label_wilson_upper.assign(c_h, 0.0);
    for (int h = 0; h < c_h; ++h) {
        rep.per_label_rate[h] = rep.per_label_count[h] > 0
                                    ? static_cast<double>(rep.per_label_errors[h]) / rep.per_label_count[h]
                                    : 0.0;
        rep.per_label_wilson_upper[h] = wilson_upper(rep.per_label_errors[h], rep.per_label_count[h]);
        rep.epsilon_max = std::max(rep.epsilon_max, rep.per_label_rate[h]);
        rep.wilson_upper_max = std::max(rep.wilson_upper_max, rep.per_label_wilson_upper[h]);
        rep.pi_p[h] /= static_cast<double>(samples);
    }
    rep.epsilon_overall = static_cast<double>(wrong) / samples;
    return rep;
}

SweepResult sweep(const Instance& instance, const DerivedConstants& constants, PolicyKind policy,
                  const Overrides& overrides, std::span<const double> deltas, int m_lo, int m_hi,
                  const CapacitySettings& settings, double c0) {
    SweepResult out;
    out.c0 = c0;
    for (double delta : deltas) {
        SweepRow row;
        row.delta = delta;
        double lg = std::log(1.0 / delta);
        row.envelope = 1.0 + c0 * std::sqrt(std::log(lg) / lg);
        try {
            FlpResult flp = solve_flp(instance, constants, delta);
            row.m_star_f = flp.m_star_f;
            row.b_delta_value = b_delta(delta);
            CapacityResult cap =
                min_stable_m(instance, constants, delta, policy, overrides, m_lo, m_hi, settings);
            row.m_psi = cap.m_psi;
            row.ratio = cap.ratio;
        } catch (const Error& e) {
            row.error = e.name();
        }
        out.rows.push_back(row);
    }
    return out;
}

}  // namespace ips
