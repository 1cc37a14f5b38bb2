#include "ips/llr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ips/errors.hpp"

namespace ips {

LlrState LlrState::from_matrix(int n_labels, std::vector<double> s, int n_inspections) {
    if (s.size() != static_cast<std::size_t>(n_labels) * n_labels)
        throw ProtocolViolation("matrix shape does not match label count");
    for (int h = 0; h < n_labels; ++h)
        for (int l = 0; l < n_labels; ++l)
            if (std::abs(s[static_cast<std::size_t>(h) * n_labels + l] +
                         s[static_cast<std::size_t>(l) * n_labels + h]) > 1e-9)
                throw ProtocolViolation("matrix is not antisymmetric");
    LlrState out(n_labels);
    out.s_ = std::move(s);
    out.n_inspections_ = n_inspections;
    return out;
}

double LlrState::min_margin(int h) const {
    double m = std::numeric_limits<double>::infinity();
    for (int l = 0; l < n_; ++l) {
        if (l == h) continue;
        m = std::min(m, s(h, l));
    }
    return m;
}

void llr_update_inplace(LlrState& state, const Instance& instance, const InspectionRecord& record) {
    const int k = record.expert_type;
    const int x = record.outcome;
    const int c_h = instance.n_labels();

    bool possible = false;
    for (int h = 0; h < c_h; ++h) {
        if (instance.p(h, k, x) > 0.0) {
            possible = true;
            break;
        }
    }
    if (!possible)
        throw SupportMismatch("observed an outcome with zero probability under every label");

    for (int h = 0; h < c_h; ++h) {
        for (int l = h + 1; l < c_h; ++l) {
            double z = std::log(instance.p(h, k, x) / instance.p(l, k, x));
            state.s_[static_cast<std::size_t>(h) * c_h + l] += z;
            state.s_[static_cast<std::size_t>(l) * c_h + h] -= z;
        }
    }
    ++state.n_inspections_;
}

LlrState llr_update(LlrState state, const Instance& instance, const InspectionRecord& record) {
    llr_update_inplace(state, instance, record);
    return state;
}

int ml_estimate(const LlrState& state) {
    int best = 0;
    double best_margin = -std::numeric_limits<double>::infinity();
    for (int h = 0; h < state.n_labels(); ++h) {
        double m = state.min_margin(h);
        if (m > best_margin) {
            best_margin = m;
            best = h;
        }
    }
    return best;
}

std::optional<int> check_certificate(const LlrState& state, double x) {
    for (int h = 0; h < state.n_labels(); ++h) {
        if (state.min_margin(h) >= x) return h;
    }
    return std::nullopt;
}

}  // namespace ips
