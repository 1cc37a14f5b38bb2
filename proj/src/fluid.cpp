#include "ips/fluid.hpp"

#include <algorithm>
#include <cmath>

#include "ips/errors.hpp"
#include "ips/rng.hpp"

namespace ips {

namespace {

double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace

FluidTrajectory fluid_integrate(const Instance& instance, const DerivedConstants& constants,
                                const PolicyParams& params, const FluidOptions& options,
                                std::span<const double> w0) {
    const int c_k = instance.n_types();
    const int c_h = instance.n_labels();
    if (static_cast<int>(w0.size()) != c_k + 1) throw ConfigError("w0 must have c_K+1 coordinates");
    if (!(options.dt > 0.0)) throw ConfigError("dt must be positive");

    std::vector<double> pi_p = options.pi_p.empty() ? instance.prior : options.pi_p;
    if (static_cast<int>(pi_p.size()) != c_h) throw ConfigError("pi_p has wrong length");

    const double inflate = 1.0 + 1.0 / std::log(1.0 / params.delta);
    const int steps = static_cast<int>(std::ceil(options.horizon / options.dt));

    FluidTrajectory traj;
    traj.time.reserve(steps + 1);
    traj.states.reserve(steps + 1);
    traj.lyapunov.reserve(steps + 1);

    std::vector<double> w(w0.begin(), w0.end());
    for (double v : w)
        if (v < 0.0) throw ConfigError("w0 must be nonnegative");

    traj.time.push_back(0.0);
    traj.states.push_back(w);
    traj.lyapunov.push_back(norm2(w));

    std::vector<double> weights(c_k), arrive(c_k), drift(c_k + 1), selection(c_k);
    for (int step = 0; step < steps; ++step) {
        for (int k = 0; k < c_k; ++k) weights[k] = w[k + 1];

        std::fill(arrive.begin(), arrive.end(), 0.0);
        std::fill(selection.begin(), selection.end(), 0.0);
        for (int h = 0; h < c_h; ++h) {
            WorkloadVector wv = workload_vector(instance, constants, params, h, weights);
            for (int k = 0; k < c_k; ++k) {
                arrive[k] += inflate * pi_p[h] * wv.pre_floor[k];
                selection[k] += pi_p[h] * wv.pre_floor[k];
            }
            if (options.scale_check_stride > 0 && step % options.scale_check_stride == 0) {
                std::vector<double> scaled(weights);
                for (double& x : scaled) x *= 2.0;
                WorkloadVector wv2 = workload_vector(instance, constants, params, h, scaled);
                for (int k = 0; k < c_k; ++k) {
                    if (std::abs(wv2.pre_floor[k] - wv.pre_floor[k]) > 1e-12)
                        throw NumericalInstability(
                            "workload LP selection is not scale-invariant along the fluid path");
                }
            }
        }

        drift[0] = (w[0] > 0.0) ? (params.n_prep - options.mq_prep) : 0.0;
        for (int k = 0; k < c_k; ++k)
            drift[k + 1] = (w[k + 1] > 0.0) ? (arrive[k] - constants.r[k] * options.mq_adapt) : 0.0;

        double drift_norm = norm2(drift);
        traj.max_drift = std::max(traj.max_drift, drift_norm);

        double l_before = traj.lyapunov.back();
        for (int k = 0; k <= c_k; ++k) w[k] = std::max(0.0, w[k] + options.dt * drift[k]);
        double l_after = norm2(w);

        double allowed = 5.0 * options.dt * drift_norm;
        if (l_after > l_before + allowed) {
            traj.nonincreasing = false;
            traj.max_increase = std::max(traj.max_increase, l_after - l_before - allowed);
        }

        traj.time.push_back(options.dt * (step + 1));
        traj.states.push_back(w);
        traj.lyapunov.push_back(l_after);
        traj.selections.push_back(selection);
    }
    return traj;
}

ContractionReport check_contraction(const Instance& instance, const DerivedConstants& constants,
                                    const PolicyParams& params, const FluidOptions& options,
                                    int samples, std::uint64_t seed, bool report_only) {
    const int dim = instance.n_types() + 1;

    ContractionReport rep;
    rep.mq_prep = options.mq_prep;
    rep.mq_adapt = options.mq_adapt;
    FlpResult flp = solve_flp(instance, constants, params.delta);
    rep.threshold_stability = adaptive_stability_threshold(constants, params, flp.m_star_f);
    rep.threshold_fluid = fluid_contraction_threshold(constants, params, flp.m_star_f);
    rep.threshold_met =
        options.mq_prep > params.n_prep && options.mq_adapt > rep.threshold_stability;
    rep.samples = samples;
    if (!rep.threshold_met && !report_only)
        throw ThresholdNotMet("m q^A = " + std::to_string(options.mq_adapt) +
                              " does not clear the stability threshold " +
                              std::to_string(rep.threshold_stability));

    double worst_min = 0.0;
    std::vector<FluidTrajectory> trajs;
    trajs.reserve(samples);
    for (int s = 0; s < samples; ++s) {
        RngStream rng(seed, "fluid_sphere", s);
        std::vector<double> w0(dim);
        double n = 0.0;
        for (int k = 0; k < dim; ++k) {
            double u1 = rng.next_u01(), u2 = rng.next_u01();
            w0[k] = std::abs(std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(6.283185307179586 * u2));
            n += w0[k] * w0[k];
        }
        n = std::sqrt(n);
        for (double& x : w0) x /= n;

        FluidTrajectory traj = fluid_integrate(instance, constants, params, options, w0);
        ContractionSample cs;
        cs.w0 = w0;
        cs.nonincreasing = traj.nonincreasing;
        cs.max_drift = traj.max_drift;
        auto it = std::min_element(traj.lyapunov.begin(), traj.lyapunov.end());
        cs.min_lyapunov = *it;
        cs.time_of_min = traj.time[static_cast<std::size_t>(it - traj.lyapunov.begin())];
        rep.per_sample.push_back(std::move(cs));
        worst_min = std::max(worst_min, rep.per_sample.back().min_lyapunov);
        trajs.push_back(std::move(traj));
    }

    rep.eps_prime = std::max(0.0, 1.0 - worst_min);
    const double level = 1.0 - rep.eps_prime;

    // tau: earliest grid time by which every sample has reached the level.
    rep.tau = 0.0;
    for (int s = 0; s < samples; ++s) {
        const auto& lyap = trajs[s].lyapunov;
        double first = trajs[s].time.back();
        for (std::size_t i = 0; i < lyap.size(); ++i) {
            if (lyap[i] <= level + 1e-12) {
                first = trajs[s].time[i];
                break;
            }
        }
        rep.tau = std::max(rep.tau, first);
    }
    rep.max_l_at_tau = 0.0;
    for (int s = 0; s < samples; ++s) {
        const auto& tr = trajs[s];
        std::size_t idx = std::min(tr.time.size() - 1,
                                   static_cast<std::size_t>(std::ceil(rep.tau / options.dt)));
        double value = tr.lyapunov[idx];
        rep.max_l_at_tau = std::max(rep.max_l_at_tau, value);
        rep.per_sample[s].lyapunov_at_tau = value;
    }
    rep.certified = rep.threshold_met && rep.eps_prime > 0.01;
    return rep;
}

}  // namespace ips
