#include "ips/report_io.hpp"

#include <cstdio>

namespace ips {

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::string digest_hex(std::uint64_t digest) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(digest));
    return buf;
}

ordered_json instance_to_json(const Instance& instance) {
    ordered_json j;
    j["labels"] = instance.labels;
    j["expert_types"] = instance.expert_types;
    j["outcomes"] = instance.outcomes;
    j["prior"] = instance.prior;
    j["mixture"] = instance.mixture;
    j["rates"] = instance.rates;
    return j;
}

ordered_json constants_to_json(const DerivedConstants& constants, const Instance& instance) {
    ordered_json j;
    ordered_json kl = ordered_json::array();
    for (int h = 0; h < constants.n_labels; ++h) {
        ordered_json row_h = ordered_json::array();
        for (int l = 0; l < constants.n_labels; ++l) {
            ordered_json row_l = ordered_json::array();
            for (int k = 0; k < constants.n_types; ++k) row_l.push_back(constants.kl(h, l, k));
            row_h.push_back(row_l);
        }
        kl.push_back(row_h);
    }
    j["kl_tensor"] = kl;
    j["d_bar"] = constants.d_bar;
    j["d_under"] = constants.d_under;
    j["d_a"] = constants.d_a;
    j["z_bar"] = constants.z_bar;
    j["zeta0"] = constants.zeta0;
    j["r"] = constants.r;
    (void)instance;
    return j;
}

ordered_json params_to_json(const PolicyParams& params) {
    ordered_json j;
    j["delta"] = params.delta;
    j["m"] = params.m;
    j["zeta0"] = params.zeta0;
    j["n_prep"] = params.n_prep;
    j["n_resid"] = params.n_resid;
    j["g_delta"] = params.g_delta;
    j["v_delta"] = params.v_delta;
    j["q_prep"] = params.q_prep;
    j["q_adapt"] = params.q_adapt;
    j["q_resid"] = params.q_resid;
    j["threshold_adapt"] = params.threshold_adapt;
    j["threshold_heuristic"] = params.threshold_heuristic;
    j["overridden"] = params.overridden;
    return j;
}

ordered_json overrides_to_json(const Overrides& overrides) {
    ordered_json j = ordered_json::object();
    if (overrides.zeta0) j["zeta0"] = *overrides.zeta0;
    if (overrides.zeta0_scale) j["zeta0_scale"] = *overrides.zeta0_scale;
    if (overrides.g_delta) j["g_delta"] = *overrides.g_delta;
    if (overrides.v_delta) j["v_delta"] = *overrides.v_delta;
    if (overrides.n_prep) j["n_prep"] = *overrides.n_prep;
    if (overrides.n_resid) j["n_resid"] = *overrides.n_resid;
    if (overrides.qp_numerator) j["qp_numerator"] = *overrides.qp_numerator;
    if (overrides.qr_numerator) j["qr_numerator"] = *overrides.qr_numerator;
    return j;
}

ordered_json flp_to_json(const FlpResult& flp, const Instance& instance) {
    ordered_json j;
    j["m_star_f"] = flp.m_star_f;
    ordered_json alloc = ordered_json::object();
    for (int h = 0; h < instance.n_labels(); ++h) {
        ordered_json row = ordered_json::object();
        for (int k = 0; k < instance.n_types(); ++k)
            row[instance.expert_types[k]] = flp.alloc(h, k);
        alloc[instance.labels[h]] = row;
    }
    j["allocation"] = alloc;
    j["b_delta"] = b_delta(flp.delta);
    j["lower_bound"] = lower_bound(flp.delta, flp.m_star_f);
    j["delta"] = flp.delta;
    j["totals_within_d_under"] = flp.totals_within_d_under;
    return j;
}

ordered_json report_to_json(const SimReport& report, const Instance& instance) {
    ordered_json j;
    j["arrivals"] = report.arrivals;
    j["departures"] = report.departures;
    ordered_json per_label = ordered_json::array();
    long long miscls = 0;
    for (int h = 0; h < instance.n_labels(); ++h) {
        ordered_json row;
        row["label"] = instance.labels[h];
        row["arrivals"] = report.arrivals_by_label[h];
        row["departures"] = report.departures_by_label[h];
        row["misclassified"] = report.misclassified_by_label[h];
        row["residual_departures"] = report.residual_departures_by_label[h];
        row["residual_misclassified"] = report.residual_misclassified_by_label[h];
        miscls += report.misclassified_by_label[h];
        per_label.push_back(row);
    }
    j["per_label"] = per_label;
    j["misclassified_total"] = miscls;
    j["residual_entries"] = report.residual_entries;
    ordered_json experts = ordered_json::array();
    for (int k = 0; k < instance.n_types(); ++k) {
        ordered_json row;
        row["type"] = instance.expert_types[k];
        row["experts"] = report.experts_by_type[k];
        row["inspect_fraction"] = report.inspect_fraction_by_type[k];
        row["vacation_fraction"] = report.vacation_fraction_by_type[k];
        row["inspections"] = report.inspections_by_type[k];
        experts.push_back(row);
    }
    j["experts"] = experts;
    j["final_q"] = report.final_q;
    j["mean_q"] = report.mean_q(0.0, 1.0);
    j["horizon"] = report.horizon;
    j["m"] = report.m;
    j["seed"] = report.seed;
    j["determinism_digest"] = digest_hex(report.determinism_digest);
    if (report.heuristic_assumption_violated)
        j["heuristic_assumption_violated"] = true;
    return j;
}

ordered_json capacity_to_json(const CapacityResult& result) {
    ordered_json j;
    j["m_psi"] = result.m_psi;
    j["m_star_f"] = result.m_star_f;
    j["b_delta"] = result.b_delta_value;
    j["ratio"] = result.ratio;
    j["delta"] = result.delta;
    j["policy"] = to_string(result.policy);
    j["replicas"] = result.settings.replicas;
    j["horizon"] = result.settings.horizon;
    j["warmup_frac"] = result.settings.warmup_frac;
    j["seed"] = result.settings.seed;
    j["overrides"] = overrides_to_json(result.overrides);
    j["monotonicity_assumed"] = true;  // bisection treats stability as monotone in m
    ordered_json evals = ordered_json::array();
    for (const auto& e : result.evaluations) {
        ordered_json row;
        row["m"] = e.m;
        row["verdict"] = e.infeasible ? "infeasible" : to_string(e.verdict);
        ordered_json reps = ordered_json::array();
        for (const auto& r : e.detail.replicas) {
            ordered_json d;
            d["seed"] = r.seed;
            d["slope"] = r.slope;
            d["mean_q"] = r.mean_q;
            d["middle_third_mean"] = r.middle_third_mean;
            d["final_third_mean"] = r.final_third_mean;
            d["final_q"] = r.final_q;
            d["stable"] = r.stable;
            reps.push_back(d);
        }
        row["replicas"] = reps;
        evals.push_back(row);
    }
    j["evaluations"] = evals;
    if (result.residual_rate_checked) {
        j["residual_rate_lhs"] = result.residual_rate_lhs;
        j["residual_rate_rhs"] = result.residual_rate_rhs;
        j["residual_rate_ok"] = result.residual_rate_ok;
    }
    j["warnings"] = result.warnings;
    return j;
}

ordered_json prep_error_to_json(const PrepErrorReport& report, const Instance& instance) {
    ordered_json j;
    j["n_prep"] = report.n_prep;
    j["samples"] = report.samples;
    ordered_json per_label = ordered_json::array();
    for (int h = 0; h < instance.n_labels(); ++h) {
        ordered_json row;
        row["label"] = instance.labels[h];
        row["samples"] = report.per_label_count[h];
        row["errors"] = report.per_label_errors[h];
        row["rate"] = report.per_label_rate[h];
        row["wilson_upper"] = report.per_label_wilson_upper[h];
        per_label.push_back(row);
    }
    j["per_label"] = per_label;
    j["epsilon_max"] = report.epsilon_max;
    j["wilson_upper_max"] = report.wilson_upper_max;
    j["epsilon_overall"] = report.epsilon_overall;
    j["bound"] = report.bound;
    j["pi_p"] = report.pi_p;
    return j;
}

ordered_json contraction_to_json(const ContractionReport& report) {
    ordered_json j;
    j["mq_prep"] = report.mq_prep;
    j["mq_adapt"] = report.mq_adapt;
    j["threshold_stability"] = report.threshold_stability;
    j["threshold_fluid"] = report.threshold_fluid;
    j["threshold_met"] = report.threshold_met;
    j["samples"] = report.samples;
    j["tau"] = report.tau;
    j["eps_prime"] = report.eps_prime;
    j["max_l_at_tau"] = report.max_l_at_tau;
    j["certified"] = report.certified;
    ordered_json rows = ordered_json::array();
    for (const auto& s : report.per_sample) {
        ordered_json row;
        row["w0"] = s.w0;
        row["min_lyapunov"] = s.min_lyapunov;
        row["time_of_min"] = s.time_of_min;
        row["lyapunov_at_tau"] = s.lyapunov_at_tau;
        row["nonincreasing"] = s.nonincreasing;
        row["max_drift"] = s.max_drift;
        rows.push_back(row);
    }
    j["per_sample"] = rows;
    return j;
}

void write_timeseries_csv(std::ostream& out, const SimReport& report, const Instance& instance) {
    out << "time,Q,Q_P,Q_A,Q_R";
    for (int k = 0; k <= instance.n_types(); ++k) out << ",W_" << k;
    out << "\n";
    for (std::size_t i = 0; i < report.grid_time.size(); ++i) {
        out << fmt_double(report.grid_time[i]) << ',' << fmt_double(report.q_series[i]) << ','
            << fmt_double(report.qp_series[i]) << ',' << fmt_double(report.qa_series[i]) << ','
            << fmt_double(report.qr_series[i]);
        for (int k = 0; k <= instance.n_types(); ++k) out << ',' << fmt_double(report.w_series[k][i]);
        out << "\n";
    }
}

void write_trajectory_csv(std::ostream& out, const FluidTrajectory& trajectory) {
    const std::size_t dim = trajectory.states.empty() ? 0 : trajectory.states.front().size();
    out << "time";
    for (std::size_t k = 0; k < dim; ++k) out << ",w_" << k;
    out << ",L\n";
    for (std::size_t i = 0; i < trajectory.time.size(); ++i) {
        out << fmt_double(trajectory.time[i]);
        for (std::size_t k = 0; k < dim; ++k) out << ',' << fmt_double(trajectory.states[i][k]);
        out << ',' << fmt_double(trajectory.lyapunov[i]) << "\n";
    }
}

void write_sweep_csv(std::ostream& out, const SweepResult& sweep) {
    out << "delta,m_psi,m_star_f,b_delta,ratio,envelope,error\n";
    for (const auto& row : sweep.rows) {
        out << fmt_double(row.delta) << ',' << row.m_psi << ',' << fmt_double(row.m_star_f) << ','
            << fmt_double(row.b_delta_value) << ',' << fmt_double(row.ratio) << ','
            << fmt_double(row.envelope) << ',' << row.error << "\n";
    }
}

}  // namespace ips
