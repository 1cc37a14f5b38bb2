#include "ips/policy.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <unordered_map>
#include <vector>

#include "ips/errors.hpp"

namespace ips {

PolicyKind policy_kind_from_string(const std::string& name) {
    if (name == "three-stage") return PolicyKind::ThreeStage;
    if (name == "heuristic") return PolicyKind::Heuristic;
    if (name == "oracle") return PolicyKind::Oracle;
    throw ConfigError("unknown policy: " + name + " (expected three-stage | heuristic | oracle)");
}

std::string to_string(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::ThreeStage: return "three-stage";
        case PolicyKind::Heuristic: return "heuristic";
        case PolicyKind::Oracle: return "oracle";
    }
    return "?";
}

std::optional<int> heuristic_departure_check(const LlrState& llr, double delta) {
    return check_certificate(llr, std::log(llr.n_labels() / delta));
}

namespace {

// ---------------------------------------------------------------------------
// Three-stage policy (Preparation -> Adaptive -> Residual)
// ---------------------------------------------------------------------------

class ThreeStagePolicy final : public Policy {
    enum class Stage { Prep, Adaptive, Residual };

    struct JobState {
        Stage stage = Stage::Prep;
        LlrState llr;
        int uninit_prep = 0;
        int recv_prep = 0;
        int coarse = -1;
        std::vector<int> uninit_adapt;
        int total_adapt = 0;
        int recv_adapt = 0;
        int uninit_resid = 0;
        int recv_resid = 0;
        int outstanding = 0;
    };

public:
    ThreeStagePolicy(const Instance& instance, const DerivedConstants& constants,
                     const PolicyParams& params)
        : instance_(instance),
          constants_(constants),
          params_(params),
          adapt_queue_(instance.n_types()),
          wk_(instance.n_types(), 0) {}

    std::optional<Departure> on_arrival(int job_id, std::optional<int>, RngStream&, double) override {
        JobState js;
        js.llr = LlrState(instance_.n_labels());
        js.uninit_prep = params_.n_prep;
        auto [it, ok] = jobs_.emplace(job_id, std::move(js));
        if (!ok) throw ProtocolViolation("duplicate job id");
        ++q_prep_;
        if (params_.n_prep == 0) return enter_adaptive(job_id, it->second);
        w0_ += params_.n_prep;
        prep_queue_.push_back(job_id);
        return std::nullopt;
    }

    PolicyAction on_expert_idle(int, int expert_type, RngStream& stage_rng, double) override {
        double u = stage_rng.next_u01();
        if (u < params_.q_prep) return visit_prep();
        if (u < params_.q_prep + params_.q_adapt) return visit_adaptive(expert_type);
        return visit_residual();
    }

    std::optional<Departure> on_outcome(int job_id, const InspectionRecord& record, double) override {
        auto it = jobs_.find(job_id);
        if (it == jobs_.end()) throw ProtocolViolation("outcome for unknown job");
        JobState& js = it->second;
        if (js.outstanding <= 0) throw ProtocolViolation("outcome without outstanding inspection");
        --js.outstanding;
        llr_update_inplace(js.llr, instance_, record);

        switch (js.stage) {
            case Stage::Prep:
                if (++js.recv_prep > params_.n_prep)
                    throw ProtocolViolation("Preparation outcomes exceed n_prep");
                if (js.recv_prep == params_.n_prep) return enter_adaptive(job_id, js);
                return std::nullopt;
            case Stage::Adaptive:
                if (++js.recv_adapt > js.total_adapt)
                    throw ProtocolViolation("Adaptive outcomes exceed the assigned workload");
                if (js.recv_adapt == js.total_adapt) return adaptive_exit(job_id, js);
                return std::nullopt;
            case Stage::Residual:
                if (++js.recv_resid > params_.n_resid)
                    throw ProtocolViolation("Residual outcomes exceed n_resid");
                if (js.recv_resid == params_.n_resid) {
                    Departure dep{ml_estimate(js.llr), true};
                    remove_job(job_id, js);
                    return dep;
                }
                return std::nullopt;
        }
        return std::nullopt;
    }

    void workload_snapshot(std::span<double> w) const override {
        w[0] = static_cast<double>(w0_);
        for (std::size_t k = 0; k < wk_.size(); ++k) w[k + 1] = static_cast<double>(wk_[k]);
    }

    void stage_counts(int& q_prep, int& q_adapt, int& q_resid) const override {
        q_prep = q_prep_;
        q_adapt = q_adapt_;
        q_resid = q_resid_;
    }

    long long residual_entries() const override { return residual_entries_; }

private:
    PolicyAction visit_prep() {
        if (w0_ == 0) return PolicyAction::vacation();
        int job_id = prep_queue_.front();
        JobState& js = jobs_.at(job_id);
        --js.uninit_prep;
        --w0_;
        ++js.outstanding;
        if (js.uninit_prep == 0) prep_queue_.pop_front();
        return PolicyAction::inspect(job_id);
    }

    // Experts serve only their own type's Adaptive workload.
    PolicyAction visit_adaptive(int k) {
        if (wk_[k] == 0) return PolicyAction::vacation();
        int job_id = adapt_queue_[k].front();
        JobState& js = jobs_.at(job_id);
        --js.uninit_adapt[k];
        --wk_[k];
        ++js.outstanding;
        if (js.uninit_adapt[k] == 0) adapt_queue_[k].pop_front();
        return PolicyAction::inspect(job_id);
    }

    PolicyAction visit_residual() {
        if (resid_queue_.empty()) return PolicyAction::vacation();
        int job_id = resid_queue_.front();
        JobState& js = jobs_.at(job_id);
        --js.uninit_resid;
        ++js.outstanding;
        if (js.uninit_resid == 0) resid_queue_.pop_front();
        return PolicyAction::inspect(job_id);
    }

    std::optional<Departure> enter_adaptive(int job_id, JobState& js) {
        js.stage = Stage::Adaptive;
        --q_prep_;
        ++q_adapt_;
        js.coarse = ml_estimate(js.llr);

        // Workload vector from the LP at the instant of Adaptive entry,
        // weighted by the current uninitiated per-type workloads.
        std::vector<double> weights(wk_.begin(), wk_.end());
        WorkloadVector wv = workload_vector(instance_, constants_, params_, js.coarse, weights);
        js.uninit_adapt.assign(wv.lambda.begin(), wv.lambda.end());
        js.total_adapt = static_cast<int>(wv.total());
        js.recv_adapt = 0;
        if (js.total_adapt == 0) return adaptive_exit(job_id, js);
        for (int k = 0; k < instance_.n_types(); ++k) {
            if (js.uninit_adapt[k] > 0) {
                adapt_queue_[k].push_back(job_id);
                wk_[k] += js.uninit_adapt[k];
            }
        }
        return std::nullopt;
    }

    std::optional<Departure> adaptive_exit(int job_id, JobState& js) {
        if (auto h = check_certificate(js.llr, params_.threshold_adapt)) {
            Departure dep{*h, false};
            remove_job(job_id, js);
            return dep;
        }
        // Verification failed: fresh start in the Residual stage, previous
        // inspections discarded.
        js.stage = Stage::Residual;
        --q_adapt_;
        ++q_resid_;
        ++residual_entries_;
        js.llr.reset();
        js.uninit_resid = params_.n_resid;
        js.recv_resid = 0;
        if (params_.n_resid == 0) {
            Departure dep{ml_estimate(js.llr), true};
            remove_job(job_id, js);
            return dep;
        }
        resid_queue_.push_back(job_id);
        return std::nullopt;
    }

    void remove_job(int job_id, JobState& js) {
        if (js.outstanding != 0)
            throw ProtocolViolation("three-stage job departing with outstanding inspections");
        switch (js.stage) {
            case Stage::Prep: --q_prep_; break;
            case Stage::Adaptive: --q_adapt_; break;
            case Stage::Residual: --q_resid_; break;
        }
        jobs_.erase(job_id);
    }

    const Instance& instance_;
    const DerivedConstants& constants_;
    const PolicyParams& params_;

    std::unordered_map<int, JobState> jobs_;
    std::deque<int> prep_queue_;
    std::vector<std::deque<int>> adapt_queue_;
    std::deque<int> resid_queue_;
    long long w0_ = 0;
    std::vector<long long> wk_;
    int q_prep_ = 0, q_adapt_ = 0, q_resid_ = 0;
    long long residual_entries_ = 0;
};

// ---------------------------------------------------------------------------
// Max-weight heuristic: single stage, expert routing on aggregate
// residual workloads.
// ---------------------------------------------------------------------------

class HeuristicPolicy final : public Policy {
    struct JobState {
        LlrState llr;
        int estimate = 0;
    };

public:
    HeuristicPolicy(const Instance& instance, const DerivedConstants& constants, double delta)
        : instance_(instance),
          constants_(constants),
          threshold_(std::log(instance.n_labels() / delta)),
          classes_(instance.n_labels()),
          wbar_(static_cast<std::size_t>(instance.n_labels()) * instance.n_labels(), 0.0) {}

    std::optional<Departure> on_arrival(int job_id, std::optional<int>, RngStream& policy_rng,
                                        double) override {
        JobState js;
        js.llr = LlrState(instance_.n_labels());
        js.estimate = policy_rng.next_int(instance_.n_labels());
        add_contribution(js);
        classes_[js.estimate].insert(job_id);
        jobs_.emplace(job_id, std::move(js));
        return std::nullopt;
    }

    PolicyAction on_expert_idle(int, int expert_type, RngStream&, double) override {
        if (jobs_.empty()) return PolicyAction::vacation();
        const int c_h = instance_.n_labels();
        // h* maximizes sum_{l != h} D(h,l,k) * Wbar(h,l); ties by lowest
        // index; classes with no jobs fall through to the next-best score.
        std::vector<int> order(c_h);
        std::vector<double> score(c_h, 0.0);
        for (int h = 0; h < c_h; ++h) {
            order[h] = h;
            for (int l = 0; l < c_h; ++l)
                if (l != h) score[h] += constants_.kl(h, l, expert_type) * wbar(h, l);
        }
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return score[a] > score[b]; });
        for (int h : order) {
            if (!classes_[h].empty()) return PolicyAction::inspect(*classes_[h].begin());
        }
        return PolicyAction::vacation();
    }

    std::optional<Departure> on_outcome(int job_id, const InspectionRecord& record, double) override {
        auto it = jobs_.find(job_id);
        if (it == jobs_.end()) throw ProtocolViolation("outcome for unknown job");
        JobState& js = it->second;

        remove_contribution(js);
        llr_update_inplace(js.llr, instance_, record);
        int fresh = ml_estimate(js.llr);
        if (fresh != js.estimate) {
            classes_[js.estimate].erase(job_id);
            js.estimate = fresh;
            classes_[js.estimate].insert(job_id);
        }
        add_contribution(js);
        if (++ops_since_rebuild_ >= 4096) rebuild_aggregates();

        if (auto h = check_certificate(js.llr, threshold_)) {
            remove_contribution(js);
            classes_[js.estimate].erase(job_id);
            jobs_.erase(it);
            return Departure{*h, false};
        }
        return std::nullopt;
    }

    void workload_snapshot(std::span<double> w) const override {
        double total = 0.0;
        for (double v : wbar_) total += v;
        w[0] = total;
        for (std::size_t k = 1; k < w.size(); ++k) w[k] = 0.0;
    }

    void stage_counts(int& q_prep, int& q_adapt, int& q_resid) const override {
        q_prep = 0;
        q_adapt = static_cast<int>(jobs_.size());
        q_resid = 0;
    }

    double aggregate_drift() override {
        std::vector<double> before = wbar_;
        rebuild_aggregates();
        double worst = 0.0;
        for (std::size_t i = 0; i < wbar_.size(); ++i)
            worst = std::max(worst, std::abs(before[i] - wbar_[i]));
        return worst;
    }

private:
    void rebuild_aggregates() {
        std::fill(wbar_.begin(), wbar_.end(), 0.0);
        for (int h = 0; h < instance_.n_labels(); ++h) {
            for (int job_id : classes_[h]) add_contribution(jobs_.at(job_id));
        }
        ops_since_rebuild_ = 0;
    }

    double& wbar(int h, int l) { return wbar_[static_cast<std::size_t>(h) * instance_.n_labels() + l]; }
    double wbar(int h, int l) const {
        return wbar_[static_cast<std::size_t>(h) * instance_.n_labels() + l];
    }

    // A job contributes (threshold - S(e,l))^+ on its estimate's row only.
    void add_contribution(const JobState& js) {
        for (int l = 0; l < instance_.n_labels(); ++l)
            if (l != js.estimate) wbar(js.estimate, l) += std::max(0.0, threshold_ - js.llr.s(js.estimate, l));
    }
    void remove_contribution(const JobState& js) {
        for (int l = 0; l < instance_.n_labels(); ++l)
            if (l != js.estimate) wbar(js.estimate, l) -= std::max(0.0, threshold_ - js.llr.s(js.estimate, l));
    }

    const Instance& instance_;
    const DerivedConstants& constants_;
    double threshold_;
    std::unordered_map<int, JobState> jobs_;
    std::vector<std::set<int>> classes_;  // ordered by job id = arrival order
    std::vector<double> wbar_;
    long ops_since_rebuild_ = 0;
};

// ---------------------------------------------------------------------------
// Oracle baseline: knows true labels, inspects to the ceiled FLP allocation.
// ---------------------------------------------------------------------------

class OraclePolicy final : public Policy {
    struct JobState {
        int label = 0;
        std::vector<int> uninit;
        int recv = 0;
        int quota_total = 0;
    };

public:
    OraclePolicy(const Instance& instance, const DerivedConstants& constants, double delta)
        : instance_(instance), queues_(instance.n_types()), wk_(instance.n_types(), 0) {
        FlpResult flp = solve_flp(instance, constants, delta);
        quotas_.assign(static_cast<std::size_t>(instance.n_labels()) * instance.n_types(), 0);
        for (int h = 0; h < instance.n_labels(); ++h)
            for (int k = 0; k < instance.n_types(); ++k)
                quotas_[static_cast<std::size_t>(h) * instance.n_types() + k] =
                    static_cast<int>(std::ceil(flp.alloc(h, k) - 1e-9));
    }

    bool needs_truth() const override { return true; }

    std::optional<Departure> on_arrival(int job_id, std::optional<int> true_label, RngStream&,
                                        double) override {
        if (!true_label) throw ProtocolViolation("oracle policy needs true labels");
        JobState js;
        js.label = *true_label;
        js.uninit.resize(instance_.n_types());
        for (int k = 0; k < instance_.n_types(); ++k) {
            int q = quotas_[static_cast<std::size_t>(js.label) * instance_.n_types() + k];
            js.uninit[k] = q;
            js.quota_total += q;
            if (q > 0) {
                queues_[k].push_back(job_id);
                wk_[k] += q;
            }
        }
        if (js.quota_total == 0) return Departure{js.label, false};
        jobs_.emplace(job_id, std::move(js));
        return std::nullopt;
    }

    PolicyAction on_expert_idle(int, int expert_type, RngStream&, double) override {
        auto& q = queues_[expert_type];
        if (q.empty()) return PolicyAction::vacation();
        int job_id = q.front();
        JobState& js = jobs_.at(job_id);
        --js.uninit[expert_type];
        --wk_[expert_type];
        if (js.uninit[expert_type] == 0) q.pop_front();
        return PolicyAction::inspect(job_id);
    }

    std::optional<Departure> on_outcome(int job_id, const InspectionRecord&, double) override {
        auto it = jobs_.find(job_id);
        if (it == jobs_.end()) throw ProtocolViolation("outcome for unknown job");
        JobState& js = it->second;
        if (++js.recv == js.quota_total) {
            Departure dep{js.label, false};
            jobs_.erase(it);
            return dep;
        }
        return std::nullopt;
    }

    void workload_snapshot(std::span<double> w) const override {
        w[0] = 0.0;
        for (int k = 0; k < instance_.n_types(); ++k) w[k + 1] = static_cast<double>(wk_[k]);
    }

    void stage_counts(int& q_prep, int& q_adapt, int& q_resid) const override {
        q_prep = 0;
        q_adapt = static_cast<int>(jobs_.size());
        q_resid = 0;
    }

private:
    const Instance& instance_;
    std::vector<int> quotas_;  // [h][k]
    std::unordered_map<int, JobState> jobs_;
    std::vector<std::deque<int>> queues_;
    std::vector<long long> wk_;  // uninitiated units per type
};

}  // namespace

std::unique_ptr<Policy> make_policy(PolicyKind kind, const Instance& instance,
                                    const DerivedConstants& constants, const PolicyParams* params,
                                    double delta) {
    switch (kind) {
        case PolicyKind::ThreeStage:
            if (!params) throw ConfigError("three-stage policy requires policy parameters");
            return std::make_unique<ThreeStagePolicy>(instance, constants, *params);
        case PolicyKind::Heuristic:
            return std::make_unique<HeuristicPolicy>(instance, constants, delta);
        case PolicyKind::Oracle:
            return std::make_unique<OraclePolicy>(instance, constants, delta);
    }
    throw ConfigError("unknown policy kind");
}

}  // namespace ips
