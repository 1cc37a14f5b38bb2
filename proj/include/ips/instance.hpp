#pragma once
#include <span>
#include <string>
#include <vector>

namespace ips {

// A fully validated problem instance: hidden-label alphabet, expert types,
// outcome alphabet, prior pi, expert mixture rho, inspection rates mu, and
// the outcome tensor p(h,k,x). Immutable after construction and safe to
// share across threads.
struct Instance {
    std::vector<std::string> labels;
    std::vector<std::string> expert_types;
    std::vector<std::string> outcomes;
    std::vector<double> prior;    // pi_h, positive, sums to 1
    std::vector<double> mixture;  // rho_k, positive, sums to 1
    std::vector<double> rates;    // mu_k > 0, with sum_k rho_k*mu_k = 1

    // p(h,k,x), flattened [h][k][x]
    std::vector<double> outcome_tensor;

    int n_labels() const { return static_cast<int>(labels.size()); }
    int n_types() const { return static_cast<int>(expert_types.size()); }
    int n_outcomes() const { return static_cast<int>(outcomes.size()); }

    double p(int h, int k, int x) const {
        return outcome_tensor[(static_cast<std::size_t>(h) * expert_types.size() + k) * outcomes.size() + x];
    }
    std::span<const double> outcome_dist(int h, int k) const {
        return {&outcome_tensor[(static_cast<std::size_t>(h) * expert_types.size() + k) * outcomes.size()],
                outcomes.size()};
    }

    int label_index(const std::string& name) const;
};

// Constants derived from an instance: the KL tensor D(h,l,k) and the scalar
// summaries the policies and bounds are built from.
struct DerivedConstants {
    std::vector<double> kl_tensor;  // D(h,l,k), flattened [h][l][k], nats
    double d_bar = 0.0;             // max_{h!=l,k} D(h,l,k)
    double d_under = 0.0;           // min_{h!=l} max_k D(h,l,k)
    std::vector<double> d_avg;      // d(h,l) = sum_k D(h,l,k) r_k, flattened [h][l]
    double d_a = 0.0;               // min_{h!=l} d(h,l)
    double z_bar = 0.0;             // max |log-likelihood ratio|
    double zeta0 = 0.0;             // (8 z_bar^2 + 2 d_a) / d_a^2
    std::vector<double> r;          // r_k = mu_k * rho_k
    int n_labels = 0;
    int n_types = 0;

    double kl(int h, int l, int k) const {
        return kl_tensor[(static_cast<std::size_t>(h) * n_labels + l) * n_types + k];
    }
    double davg(int h, int l) const { return d_avg[static_cast<std::size_t>(h) * n_labels + l]; }
    double r_min() const;
};

// KL divergence sum_x p(x) ln(p(x)/q(x)) in nats, with 0*ln(0/.) := 0.
// Throws AbsoluteContinuityError if p(x) > 0 while q(x) = 0.
double kl_divergence(std::span<const double> p, std::span<const double> q);

// Validates every model condition (probability simplices, rate
// normalization, all-or-nothing outcome support, pairwise distinguishability)
// and returns the instance. See errors.hpp for the failure taxonomy.
Instance build_instance(Instance config);

// Parse + validate an instance from its JSON document / file.
Instance load_instance_json(const std::string& text);
Instance load_instance_file(const std::string& path);

DerivedConstants derive_constants(const Instance& instance);

// Scalar formulas, exposed separately so their monotonicity in z_bar can be
// checked directly.
double zeta0_formula(double z_bar, double d_a);
double g_delta_formula(double z_bar, double d_under, double delta);
double v_delta_formula(double d_under, double delta, int n_labels, double g_delta);

inline constexpr double kProbSumTol = 1e-12;
inline constexpr double kRateSumTol = 1e-9;

}  // namespace ips
