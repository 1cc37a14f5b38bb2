#include "ips/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <queue>
#include <unordered_map>

#include "ips/errors.hpp"

namespace ips {

int sample_outcome(const Instance& instance, int h, int k, RngStream& rng) {
    return rng.next_categorical(instance.outcome_dist(h, k));
}

double SimReport::mean_q(double from_frac, double to_frac) const {
    std::size_t lo = static_cast<std::size_t>(from_frac * q_series.size());
    std::size_t hi = static_cast<std::size_t>(to_frac * q_series.size());
    hi = std::min(hi, q_series.size());
    if (lo >= hi) return 0.0;
    double sum = 0.0;
    for (std::size_t i = lo; i < hi; ++i) sum += q_series[i];
    return sum / static_cast<double>(hi - lo);
}

std::vector<int> apportion_experts(const Instance& instance, int m) {
    const int c_k = instance.n_types();
    std::vector<int> count(c_k);
    std::vector<std::pair<double, int>> frac(c_k);
    int assigned = 0;
    for (int k = 0; k < c_k; ++k) {
        double target = instance.mixture[k] * m;
        count[k] = static_cast<int>(std::floor(target));
        assigned += count[k];
        frac[k] = {-(target - count[k]), k};  // largest remainder first
    }
    std::sort(frac.begin(), frac.end());
    for (int i = 0; i < m - assigned; ++i) ++count[frac[i % c_k].second];
    for (int k = 0; k < c_k; ++k) {
        if (count[k] == 0)
            throw ConfigError("m = " + std::to_string(m) + " leaves expert type " +
                              instance.expert_types[k] + " unstaffed");
    }
    return count;
}

namespace {

enum class EventKind : int { Arrival = 0, Completion = 1 };

struct Event {
    double time;
    std::uint64_t seq;
    EventKind kind;
    int id;  // expert id for completions

    bool operator>(const Event& other) const {
        if (time != other.time) return time > other.time;
        return seq > other.seq;
    }
};

struct Expert {
    int type = 0;
    int job = -1;  // -1 = vacation
    double busy_since = 0.0;
};

struct Job {
    int label = 0;
    RngStream outcomes;
};

// Piecewise-constant series tracker: integrates each series exactly between
// events and emits per-cell time averages.
class GridRecorder {
public:
    GridRecorder(int cells, double horizon, int n_series)
        : cells_(cells), horizon_(horizon), dt_(horizon / cells), n_(n_series),
          current_(n_series, 0.0), acc_(n_series, 0.0),
          out_(n_series, std::vector<double>(cells, 0.0)) {}

    void advance(double t) {
        t = std::min(t, horizon_);
        while (t > time_) {
            double cell_end = dt_ * (cell_ + 1);
            double upto = std::min(t, cell_end);
            double span = upto - time_;
            for (int s = 0; s < n_; ++s) acc_[s] += current_[s] * span;
            time_ = upto;
            if (time_ >= cell_end && cell_ < cells_) {
                for (int s = 0; s < n_; ++s) {
                    out_[s][cell_] = acc_[s] / dt_;
                    acc_[s] = 0.0;
                }
                ++cell_;
                if (cell_ == cells_) break;
            }
        }
    }

    void set(int series, double value) { current_[series] = value; }

    void finish() {
        advance(horizon_);
        // When dt_*cells_ lands a hair above horizon_ the last cell never
        // crosses its boundary inside advance(); flush it here.
        while (cell_ < cells_) {
            for (int s = 0; s < n_; ++s) {
                out_[s][cell_] = acc_[s] / dt_;
                acc_[s] = 0.0;
            }
            ++cell_;
        }
    }

    const std::vector<double>& series(int s) const { return out_[s]; }

private:
    int cells_;
    double horizon_, dt_;
    int n_;
    double time_ = 0.0;
    int cell_ = 0;
    std::vector<double> current_, acc_;
    std::vector<std::vector<double>> out_;
};

}  // namespace

SimReport run(const Instance& instance, const DerivedConstants& constants, PolicyKind policy_kind,
              double delta, int m, const EngineConfig& config, const PolicyParams* params) {
    if (config.horizon < 0.0) throw ConfigError("horizon must be nonnegative");
    if (params && params->delta != delta) throw ConfigError("delta does not match policy parameters");
    const auto wall_start = std::chrono::steady_clock::now();

    const int c_h = instance.n_labels();
    const int c_k = instance.n_types();
    const double T = config.horizon;
    auto policy = make_policy(policy_kind, instance, constants, params, delta);

    std::vector<int> type_count = apportion_experts(instance, m);
    std::vector<Expert> experts;
    experts.reserve(m);
    for (int k = 0; k < c_k; ++k)
        for (int i = 0; i < type_count[k]; ++i) experts.push_back(Expert{k, -1, 0.0});

    RngStream arrival_rng(config.seed, "arrival");
    RngStream label_rng(config.seed, "label");
    RngStream policy_rng(config.seed, "policy");
    std::vector<RngStream> dur_rng, stage_rng;
    for (int e = 0; e < m; ++e) {
        dur_rng.emplace_back(config.seed, "expert_duration", e);
        stage_rng.emplace_back(config.seed, "expert_stage", e);
    }

    SimReport rep;
    rep.arrivals_by_label.assign(c_h, 0);
    rep.departures_by_label.assign(c_h, 0);
    rep.misclassified_by_label.assign(c_h, 0);
    rep.residual_departures_by_label.assign(c_h, 0);
    rep.residual_misclassified_by_label.assign(c_h, 0);
    rep.inspect_fraction_by_type.assign(c_k, 0.0);
    rep.vacation_fraction_by_type.assign(c_k, 0.0);
    rep.inspections_by_type.assign(c_k, 0);
    rep.experts_by_type = type_count;
    rep.horizon = T;
    rep.m = m;
    rep.seed = config.seed;

    if (policy_kind == PolicyKind::Heuristic) {
        double min_kl = std::numeric_limits<double>::infinity();
        for (int h = 0; h < c_h; ++h)
            for (int l = 0; l < c_h; ++l)
                for (int k = 0; k < c_k; ++k)
                    if (h != l) min_kl = std::min(min_kl, constants.kl(h, l, k));
        rep.heuristic_assumption_violated = !(min_kl > 0.0);
    }

    const int series_count = 4 + (c_k + 1);  // Q, QP, QA, QR, W0..WcK
    GridRecorder recorder(std::max(1, config.grid_points), std::max(T, 1e-12), series_count);

    std::priority_queue<Event, std::vector<Event>, std::greater<Event>> heap;
    std::uint64_t seq = 0;
    std::unordered_map<int, Job> jobs;
    int next_job_id = 0;
    long long q_now = 0;
    std::uint64_t digest = fnv1a64("sim");
    std::vector<double> w_snapshot(c_k + 1, 0.0);

    double last_time = 0.0;
    auto poll_state = [&]() {
        recorder.set(0, static_cast<double>(q_now));
        int qp = 0, qa = 0, qr = 0;
        policy->stage_counts(qp, qa, qr);
        recorder.set(1, qp);
        recorder.set(2, qa);
        recorder.set(3, qr);
        policy->workload_snapshot(w_snapshot);
        for (int k = 0; k <= c_k; ++k) recorder.set(4 + k, w_snapshot[k]);
    };

    auto record_departure = [&](int job_id, const Departure& dep) {
        auto it = jobs.find(job_id);
        int truth = it->second.label;
        ++rep.departures;
        ++rep.departures_by_label[truth];
        if (dep.label != truth) ++rep.misclassified_by_label[truth];
        if (dep.via_residual) {
            ++rep.residual_departures_by_label[truth];
            if (dep.label != truth) ++rep.residual_misclassified_by_label[truth];
        }
        jobs.erase(it);
        --q_now;
    };

    // Every expert takes its first action at t = 0, in id order.
    auto act = [&](int e, double now) {
        Expert& ex = experts[e];
        PolicyAction action = policy->on_expert_idle(e, ex.type, stage_rng[e], now);
        if (action.kind == PolicyAction::Kind::Inspect) {
            if (jobs.find(action.job) == jobs.end())
                throw ProtocolViolation("policy inspected a job that is not in the system");
            ex.job = action.job;
        } else {
            ex.job = -1;
        }
        ex.busy_since = now;
        double dur = dur_rng[e].next_exponential(instance.rates[ex.type]);
        heap.push(Event{now + dur, seq++, EventKind::Completion, e});
    };

    heap.push(Event{arrival_rng.next_exponential(1.0), seq++, EventKind::Arrival, -1});
    for (int e = 0; e < m; ++e) act(e, 0.0);

    while (!heap.empty() && heap.top().time <= T) {
        Event ev = heap.top();
        heap.pop();
        if (ev.time < last_time) throw ProtocolViolation("event time went backwards");
        last_time = ev.time;
        recorder.advance(ev.time);

        if (ev.kind == EventKind::Arrival) {
            int job_id = next_job_id++;
            int label = label_rng.next_categorical(instance.prior);
            jobs.emplace(job_id, Job{label, RngStream(config.seed, "outcome", job_id)});
            ++q_now;
            ++rep.arrivals;
            ++rep.arrivals_by_label[label];
            digest = fnv1a64_u64((std::uint64_t(job_id) << 8) | 0x01, digest);
            std::optional<int> truth;
            if (policy->needs_truth()) truth = label;
            if (auto dep = policy->on_arrival(job_id, truth, policy_rng, ev.time)) {
                record_departure(job_id, *dep);
            }
            heap.push(Event{ev.time + arrival_rng.next_exponential(1.0), seq++, EventKind::Arrival, -1});
        } else {
            Expert& ex = experts[ev.id];
            double span = ev.time - ex.busy_since;
            if (ex.job >= 0) {
                rep.inspect_fraction_by_type[ex.type] += span;
                auto it = jobs.find(ex.job);
                if (it != jobs.end()) {
                    int outcome = sample_outcome(instance, it->second.label, ex.type, it->second.outcomes);
                    ++rep.inspections_by_type[ex.type];
                    digest = fnv1a64_u64((std::uint64_t(ex.job) << 16) |
                                             (std::uint64_t(outcome) << 8) | 0x02,
                                         digest);
                    if (auto dep = policy->on_outcome(ex.job, InspectionRecord{ex.type, outcome},
                                                      ev.time)) {
                        record_departure(ex.job, *dep);
                    }
                }
                // A job that departed mid-inspection absorbs the completion
                // as a no-op: the expert was busy, the outcome is discarded.
            } else {
                rep.vacation_fraction_by_type[ex.type] += span;
            }
            act(ev.id, ev.time);
        }
        poll_state();
    }

    // Close out busy intervals truncated by the horizon.
    for (const Expert& ex : experts) {
        double span = T - std::min(ex.busy_since, T);
        if (ex.job >= 0)
            rep.inspect_fraction_by_type[ex.type] += span;
        else
            rep.vacation_fraction_by_type[ex.type] += span;
    }
    recorder.finish();

    rep.grid_time.resize(std::max(1, config.grid_points));
    double dt = std::max(T, 1e-12) / rep.grid_time.size();
    for (std::size_t j = 0; j < rep.grid_time.size(); ++j) rep.grid_time[j] = dt * (j + 1);
    rep.q_series = recorder.series(0);
    rep.qp_series = recorder.series(1);
    rep.qa_series = recorder.series(2);
    rep.qr_series = recorder.series(3);
    rep.w_series.resize(c_k + 1);
    for (int k = 0; k <= c_k; ++k) rep.w_series[k] = recorder.series(4 + k);
    rep.final_q = static_cast<double>(q_now);
    rep.residual_entries = policy->residual_entries();

    if (T > 0.0) {
        for (int k = 0; k < c_k; ++k) {
            double denom = type_count[k] * T;
            rep.inspect_fraction_by_type[k] /= denom;
            rep.vacation_fraction_by_type[k] /= denom;
        }
    }
    rep.determinism_digest = digest;
    rep.wall_clock_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
    return rep;
}

}  // namespace ips
