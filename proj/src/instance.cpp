#include "ips/instance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "ips/errors.hpp"
#include "json.hpp"

namespace ips {

namespace {

void check_probability_vector(const std::vector<double>& v, const std::string& name) {
    if (v.empty()) throw SimplexError(name + " is empty");
    double sum = 0.0;
    for (double x : v) {
        if (!(x > 0.0) || !std::isfinite(x))
            throw SimplexError(name + " must have strictly positive finite entries");
        sum += x;
    }
    if (std::abs(sum - 1.0) > kProbSumTol)
        throw SimplexError(name + " does not sum to 1 (got " + std::to_string(sum) + ")");
}

}  // namespace

int Instance::label_index(const std::string& name) const {
    auto it = std::find(labels.begin(), labels.end(), name);
    if (it == labels.end()) throw ConfigError("unknown label: " + name);
    return static_cast<int>(it - labels.begin());
}

double DerivedConstants::r_min() const {
    return *std::min_element(r.begin(), r.end());
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size())
        throw AbsoluteContinuityError("distributions have different lengths");
    double sum = 0.0;
    for (std::size_t x = 0; x < p.size(); ++x) {
        if (p[x] == 0.0) continue;
        if (q[x] == 0.0)
            throw AbsoluteContinuityError("p(x) > 0 where q(x) = 0 at outcome index " + std::to_string(x));
        sum += p[x] * std::log(p[x] / q[x]);
    }
    return std::max(sum, 0.0);
}

Instance build_instance(Instance config) {
    const int c_h = config.n_labels();
    const int c_k = config.n_types();
    const int c_x = config.n_outcomes();
    if (c_h < 2) throw ConfigError("need at least 2 labels");
    if (c_k < 1) throw ConfigError("need at least 1 expert type");
    if (c_x < 2) throw ConfigError("need at least 2 outcomes");
    if (config.prior.size() != static_cast<std::size_t>(c_h))
        throw ConfigError("prior length does not match labels");
    if (config.mixture.size() != static_cast<std::size_t>(c_k) ||
        config.rates.size() != static_cast<std::size_t>(c_k))
        throw ConfigError("mixture/rates length does not match expert types");
    if (config.outcome_tensor.size() != static_cast<std::size_t>(c_h) * c_k * c_x)
        throw ConfigError("outcome tensor has wrong shape");

    check_probability_vector(config.prior, "prior");
    check_probability_vector(config.mixture, "mixture");

    for (double mu : config.rates) {
        if (!(mu > 0.0) || !std::isfinite(mu))
            throw NormalizationError("inspection rates must be positive and finite");
    }
    double mu_bar = 0.0;
    for (int k = 0; k < c_k; ++k) mu_bar += config.mixture[k] * config.rates[k];
    if (std::abs(mu_bar - 1.0) > kRateSumTol)
        throw NormalizationError("sum_k rho_k*mu_k must be 1, got " + std::to_string(mu_bar));

    // per-(h,k) rows are probability vectors
    for (int h = 0; h < c_h; ++h) {
        for (int k = 0; k < c_k; ++k) {
            double sum = 0.0;
            for (int x = 0; x < c_x; ++x) {
                double v = config.p(h, k, x);
                if (v < 0.0 || v > 1.0 || !std::isfinite(v))
                    throw ConfigError("outcome probabilities must lie in [0,1]");
                sum += v;
            }
            if (std::abs(sum - 1.0) > kProbSumTol)
                throw ConfigError("outcome distribution p(" + config.labels[h] + "," +
                                  config.expert_types[k] + ",.) does not sum to 1");
        }
    }

    // Support condition: for each (k,x), p(h,k,x) is zero for all h or
    // positive for all h. Keeps every realized log-likelihood ratio finite.
    for (int k = 0; k < c_k; ++k) {
        for (int x = 0; x < c_x; ++x) {
            bool any_zero = false, any_pos = false;
            for (int h = 0; h < c_h; ++h) {
                if (config.p(h, k, x) == 0.0)
                    any_zero = true;
                else
                    any_pos = true;
            }
            if (any_zero && any_pos)
                throw SupportMismatch("outcome " + config.outcomes[x] + " of expert type " +
                                      config.expert_types[k] +
                                      " is possible under some labels but not others");
        }
    }

    // Distinguishability: every pair of labels is separated by some type.
    for (int h = 0; h < c_h; ++h) {
        for (int l = 0; l < c_h; ++l) {
            if (h == l) continue;
            double best = 0.0;
            for (int k = 0; k < c_k; ++k)
                best = std::max(best, kl_divergence(config.outcome_dist(h, k), config.outcome_dist(l, k)));
            if (best <= 0.0)
                throw DegenerateLabels("labels " + config.labels[h] + " and " + config.labels[l] +
                                       " have identical outcome distributions under every expert type");
        }
    }

    return config;
}

Instance load_instance_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        // report the line of the failure, not just the byte offset
        std::size_t line = 1;
        for (std::size_t i = 0; i < std::min(e.byte, text.size()); ++i)
            if (text[i] == '\n') ++line;
        throw ConfigError("JSON parse error at line " + std::to_string(line) + ": " + e.what());
    }

    Instance cfg;
    try {
        cfg.labels = doc.at("labels").get<std::vector<std::string>>();
        cfg.expert_types = doc.at("expert_types").get<std::vector<std::string>>();
        cfg.outcomes = doc.at("outcomes").get<std::vector<std::string>>();
        cfg.prior = doc.at("prior").get<std::vector<double>>();
        cfg.mixture = doc.at("mixture").get<std::vector<double>>();
        cfg.rates = doc.at("rates").get<std::vector<double>>();
        const auto& tensor = doc.at("outcome_tensor");
        for (const auto& row_h : tensor)
            for (const auto& row_k : row_h)
                for (const auto& v : row_k) cfg.outcome_tensor.push_back(v.get<double>());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid instance document: ") + e.what());
    }
    return build_instance(std::move(cfg));
}

Instance load_instance_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open instance file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_instance_json(ss.str());
}

double zeta0_formula(double z_bar, double d_a) {
    return (8.0 * z_bar * z_bar + 2.0 * d_a) / (d_a * d_a);
}

double g_delta_formula(double z_bar, double d_under, double delta) {
    double lg = std::log(1.0 / delta);
    return 3.0 * z_bar / std::sqrt(d_under) * std::sqrt(lg * std::log(lg));
}

double v_delta_formula(double d_under, double delta, int n_labels, double g_delta) {
    double lg = std::log(1.0 / delta);
    return 2.0 / d_under * lg * (1.0 + (std::log(2.0 * n_labels) + g_delta) / lg);
}

DerivedConstants derive_constants(const Instance& instance) {
    DerivedConstants c;
    const int c_h = instance.n_labels();
    const int c_k = instance.n_types();
    const int c_x = instance.n_outcomes();
    c.n_labels = c_h;
    c.n_types = c_k;
    c.kl_tensor.assign(static_cast<std::size_t>(c_h) * c_h * c_k, 0.0);
    c.d_avg.assign(static_cast<std::size_t>(c_h) * c_h, 0.0);

    c.r.resize(c_k);
    for (int k = 0; k < c_k; ++k) c.r[k] = instance.rates[k] * instance.mixture[k];

    c.d_bar = 0.0;
    c.d_under = std::numeric_limits<double>::infinity();
    c.d_a = std::numeric_limits<double>::infinity();
    c.z_bar = 0.0;

    for (int h = 0; h < c_h; ++h) {
        for (int l = 0; l < c_h; ++l) {
            if (h == l) continue;
            double max_k = 0.0;
            double davg = 0.0;
            for (int k = 0; k < c_k; ++k) {
                double d = kl_divergence(instance.outcome_dist(h, k), instance.outcome_dist(l, k));
                c.kl_tensor[(static_cast<std::size_t>(h) * c_h + l) * c_k + k] = d;
                max_k = std::max(max_k, d);
                davg += d * c.r[k];
                for (int x = 0; x < c_x; ++x) {
                    if (instance.p(l, k, x) != 0.0 && instance.p(h, k, x) != 0.0)
                        c.z_bar = std::max(c.z_bar, std::abs(std::log(instance.p(h, k, x) / instance.p(l, k, x))));
                }
            }
            c.d_avg[static_cast<std::size_t>(h) * c_h + l] = davg;
            c.d_bar = std::max(c.d_bar, max_k);
            c.d_under = std::min(c.d_under, max_k);
            c.d_a = std::min(c.d_a, davg);
        }
    }
    c.zeta0 = zeta0_formula(c.z_bar, c.d_a);
    return c;
}

}  // namespace ips
