#pragma once
#include <memory>
#include <optional>
#include <span>
#include <string>

#include "ips/flp.hpp"
#include "ips/instance.hpp"
#include "ips/llr.hpp"
#include "ips/params.hpp"
#include "ips/rng.hpp"

namespace ips {

// What an idle expert does next: inspect a specific job or take a vacation
// (process a dummy job for one exponential service time).
struct PolicyAction {
    enum class Kind { Inspect, Vacation };
    Kind kind = Kind::Vacation;
    int job = -1;

    static PolicyAction inspect(int job) { return {Kind::Inspect, job}; }
    static PolicyAction vacation() { return {Kind::Vacation, -1}; }
};

struct Departure {
    int label = 0;
    bool via_residual = false;
};

// Inspection-policy interface driven by the simulation engine. A policy
// instance is owned by a single replica; all mutation is single-threaded.
//
// The engine passes the true label to on_arrival only when needs_truth() is
// true (the oracle baseline); every other policy sees inspection outcomes
// only, which enforces the hidden-label information structure at the
// interface.
class Policy {
public:
    virtual ~Policy() = default;

    virtual bool needs_truth() const { return false; }

    // May return an immediate departure under degenerate zero-workload
    // overrides.
    virtual std::optional<Departure> on_arrival(int job_id, std::optional<int> true_label,
                                                RngStream& policy_rng, double now) = 0;

    virtual PolicyAction on_expert_idle(int expert_id, int expert_type, RngStream& stage_rng,
                                        double now) = 0;

    // Outcome of a completed inspection; returns the classification when the
    // job departs.
    virtual std::optional<Departure> on_outcome(int job_id, const InspectionRecord& record,
                                                double now) = 0;

    // Reporting hooks (polled after every event, so they must be cheap).
    virtual void workload_snapshot(std::span<double> w) const = 0;  // [W_0, W_1..W_cK]
    virtual void stage_counts(int& q_prep, int& q_adapt, int& q_resid) const = 0;
    virtual long long residual_entries() const { return 0; }

    // Worst deviation between incrementally maintained aggregates and a full
    // recompute; nonzero only for policies that keep running sums.
    virtual double aggregate_drift() { return 0.0; }
};

enum class PolicyKind { ThreeStage, Heuristic, Oracle };

PolicyKind policy_kind_from_string(const std::string& name);
std::string to_string(PolicyKind kind);

// Heuristic departure rule: a job leaves as soon as some label h has
// S(h,l) >= ln(c_H/delta) against every alternative.
std::optional<int> heuristic_departure_check(const LlrState& llr, double delta);

// `params` is required for the three-stage policy and ignored otherwise;
// the oracle solves the FLP at `delta` for its inspection quotas.
std::unique_ptr<Policy> make_policy(PolicyKind kind, const Instance& instance,
                                    const DerivedConstants& constants, const PolicyParams* params,
                                    double delta);

}  // namespace ips
