#pragma once
#include <optional>
#include <vector>

#include "ips/instance.hpp"

namespace ips {

// One completed inspection: who looked (expert type) and what came back.
struct InspectionRecord {
    int expert_type = 0;
    int outcome = 0;
};

// Per-job cumulative log-likelihood ratios S(h,l) in nats, kept as a full
// antisymmetric matrix so per-pair threshold tests are direct reads.
// Owned by exactly one job; never shared across threads.
class LlrState {
public:
    LlrState() = default;
    explicit LlrState(int n_labels) : n_(n_labels), s_(static_cast<std::size_t>(n_labels) * n_labels, 0.0) {}

    // Build a state directly from an antisymmetric matrix (row-major).
    static LlrState from_matrix(int n_labels, std::vector<double> s, int n_inspections = 0);

    int n_labels() const { return n_; }
    int n_inspections() const { return n_inspections_; }
    double s(int h, int l) const { return s_[static_cast<std::size_t>(h) * n_ + l]; }

    // min over l != h of S(h,l); +inf when there is a single label
    double min_margin(int h) const;

    void reset() {
        std::fill(s_.begin(), s_.end(), 0.0);
        n_inspections_ = 0;
    }

    friend LlrState llr_update(LlrState state, const Instance& instance, const InspectionRecord& record);
    friend void llr_update_inplace(LlrState& state, const Instance& instance, const InspectionRecord& record);

private:
    int n_ = 0;
    std::vector<double> s_;
    int n_inspections_ = 0;
};

// S'(h,l) = S(h,l) + ln(p(h,k,x)/p(l,k,x)). The increment is computed once
// per pair and applied with exact +/- so antisymmetry holds bitwise.
void llr_update_inplace(LlrState& state, const Instance& instance, const InspectionRecord& record);
LlrState llr_update(LlrState state, const Instance& instance, const InspectionRecord& record);

// Maximum-likelihood estimate: the label whose worst pairwise margin is
// largest, ties broken by lowest label index. For a consistent S matrix this
// is the unique h with S(h,l) >= 0 for all l.
int ml_estimate(const LlrState& state);

// Returns h if S(h,l) >= x for every l != h (at most one such h for x > 0).
std::optional<int> check_certificate(const LlrState& state, double x);

}  // namespace ips
