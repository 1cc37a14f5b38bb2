#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "lp_vertex_oracle.hpp"

#include "ips/errors.hpp"
#include "ips/flp.hpp"
#include "ips/instance.hpp"
#include "ips/lp.hpp"
#include "ips/params.hpp"
#include "ips/rng.hpp"

using namespace ips;

namespace {

Instance animals() { return load_instance_file(IPS_ANIMALS_JSON); }

LpProblem random_bounded_lp(RngStream& rng) {
    LpProblem p;
    int n = 2 + rng.next_int(3);  // 2..4 variables
    p.objective.resize(n);
    for (double& c : p.objective) c = 2.0 * rng.next_u01() - 1.0;

    int extra = rng.next_int(5);  // up to 5 random rows + 1 box row = <= 6
    for (int i = 0; i < extra; ++i) {
        LpRow row;
        row.coeffs.resize(n);
        for (double& a : row.coeffs) a = 2.0 * rng.next_u01() - 1.0;
        if (rng.next_u01() < 0.7) {
            row.sense = RowSense::Le;
            row.rhs = 0.5 + 1.5 * rng.next_u01();  // keeps x = 0 feasible
        } else {
            row.sense = RowSense::Ge;
            row.rhs = -(0.5 + 1.5 * rng.next_u01());
        }
        p.rows.push_back(std::move(row));
    }
    LpRow box;  // guarantees a bounded feasible region
    box.coeffs.assign(n, 1.0);
    box.sense = RowSense::Le;
    box.rhs = 1.0 + 9.0 * rng.next_u01();
    p.rows.push_back(std::move(box));
    return p;
}

}  // namespace

TEST_CASE("single-constraint LP") {
    LpProblem p;
    p.objective = {1.0};
    p.rows.push_back({{1.0}, RowSense::Ge, 3.0});
    LpSolution s = solve_lp(p);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.value == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(s.x[0] == doctest::Approx(3.0).epsilon(1e-9));
    REQUIRE(s.active_rows.size() == 1);  // the single constraint binds
    CHECK(s.active_rows[0] == 0);
}

TEST_CASE("two-variable LP hits the expected vertex value") {
    LpProblem p;
    p.objective = {1.0, 1.0};
    p.rows.push_back({{1.0, 1.0}, RowSense::Ge, 2.0});
    p.rows.push_back({{1.0, -1.0}, RowSense::Ge, 0.0});
    LpSolution s = solve_lp(p);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.value == doctest::Approx(2.0).epsilon(1e-9));
    auto oracle = ips_test::vertex_enumeration_min(p);
    REQUIRE(oracle.has_value());
    CHECK(s.value == doctest::Approx(*oracle).epsilon(1e-6));
}

TEST_CASE("unbounded ray is reported") {
    LpProblem p;
    p.objective = {-1.0};
    p.rows.push_back({{-1.0}, RowSense::Le, 0.0});
    LpSolution s = solve_lp(p);
    CHECK(s.status == LpStatus::Unbounded);
}

TEST_CASE("infeasible system is reported") {
    LpProblem p;
    p.objective = {1.0};
    p.rows.push_back({{1.0}, RowSense::Le, 1.0});
    p.rows.push_back({{1.0}, RowSense::Ge, 2.0});
    LpSolution s = solve_lp(p);
    CHECK(s.status == LpStatus::Infeasible);
}

TEST_CASE("simplex agrees with vertex enumeration on 200 random bounded LPs") {
    RngStream rng(20240803, "lp");
    int checked = 0;
    for (int trial = 0; trial < 200; ++trial) {
        LpProblem p = random_bounded_lp(rng);
        LpSolution s = solve_lp(p);
        REQUIRE(s.status == LpStatus::Optimal);  // 0 is always feasible, box bounds
        auto oracle = ips_test::vertex_enumeration_min(p);
        REQUIRE(oracle.has_value());
        CHECK(s.value == doctest::Approx(*oracle).epsilon(1e-6));
        ++checked;
    }
    CHECK(checked == 200);
}

TEST_CASE("degenerate structures: duplicate rows, zero rhs, equality pairs") {
    RngStream rng(31415, "degen");
    for (int trial = 0; trial < 100; ++trial) {
        LpProblem p = random_bounded_lp(rng);
        // duplicate an existing row (redundancy leaves artificials basic at 0)
        if (!p.rows.empty()) p.rows.push_back(p.rows[rng.next_int(static_cast<int>(p.rows.size()))]);
        // a zero-rhs inequality through the origin (degenerate vertex)
        LpRow zero;
        zero.coeffs.assign(p.n_vars(), 0.0);
        zero.coeffs[0] = 1.0;
        zero.coeffs[p.n_vars() - 1] = -1.0;
        zero.sense = RowSense::Ge;
        zero.rhs = 0.0;
        p.rows.push_back(zero);
        // an equality written as a Le/Ge pair
        LpRow eq;
        eq.coeffs.assign(p.n_vars(), 1.0);
        eq.rhs = 0.8;
        eq.sense = RowSense::Le;
        p.rows.push_back(eq);
        eq.sense = RowSense::Ge;
        p.rows.push_back(eq);

        LpSolution s = solve_lp(p);
        auto oracle = ips_test::vertex_enumeration_min(p);
        if (s.status == LpStatus::Optimal) {
            REQUIRE(oracle.has_value());
            CHECK(s.value == doctest::Approx(*oracle).epsilon(1e-6));
        } else {
            CHECK(s.status == LpStatus::Infeasible);
            CHECK(!oracle.has_value());
        }
    }
}

TEST_CASE("optimal solutions are feasible and satisfy complementary slackness") {
    RngStream rng(77, "cs");
    for (int trial = 0; trial < 50; ++trial) {
        LpProblem p = random_bounded_lp(rng);
        LpSolution s = solve_lp(p);
        REQUIRE(s.status == LpStatus::Optimal);
        // primal feasibility within 1e-8; y_i * slack_i ~ 0 per row;
        // x_j * reduced_cost_j ~ 0 per variable
        for (std::size_t i = 0; i < p.rows.size(); ++i) {
            double lhs = 0.0;
            for (int j = 0; j < p.n_vars(); ++j) lhs += p.rows[i].coeffs[j] * s.x[j];
            if (p.rows[i].sense == RowSense::Le)
                CHECK(lhs <= p.rows[i].rhs + 1e-8);
            else
                CHECK(lhs >= p.rows[i].rhs - 1e-8);
            CHECK(std::abs(s.duals[i] * (lhs - p.rows[i].rhs)) <= 1e-6);
        }
        for (int j = 0; j < p.n_vars(); ++j) CHECK(s.x[j] >= -1e-8);
        for (int j = 0; j < p.n_vars(); ++j) {
            double rc = p.objective[j];
            for (std::size_t i = 0; i < p.rows.size(); ++i) rc -= s.duals[i] * p.rows[i].coeffs[j];
            CHECK(std::abs(s.x[j] * rc) <= 1e-6);
        }
    }
}

TEST_CASE("solver is deterministic on identical input") {
    RngStream rng(5150, "det");
    LpProblem p = random_bounded_lp(rng);
    LpSolution a = solve_lp(p);
    LpSolution b = solve_lp(p);
    REQUIRE(a.status == b.status);
    CHECK(a.value == b.value);
    for (int j = 0; j < p.n_vars(); ++j) CHECK(a.x[j] == b.x[j]);
}

TEST_CASE("FLP on the symmetric animals instance has the closed-form optimum") {
    Instance inst = animals();
    DerivedConstants c = derive_constants(inst);
    const double d = 0.5 * std::log(3.0);
    for (double delta : {1e-1, 1e-2, 1e-3}) {
        FlpResult flp = solve_flp(inst, c, delta);
        double expect = std::log(1.0 / delta) / d;
        CHECK(flp.m_star_f == doctest::Approx(expect).epsilon(1e-4));
        CHECK(flp.m_star_f >= std::log(1.0 / delta) / c.d_bar - 1e-8);
    }
}

TEST_CASE("FLP specialist allocation at delta = e^-3") {
    Instance inst = animals();
    DerivedConstants c = derive_constants(inst);
    FlpResult flp = solve_flp(inst, c, std::exp(-3.0));
    CHECK(flp.m_star_f == doctest::Approx(5.4615).epsilon(1e-4 / 5.4615));
    // every label's evidence requirement is met
    for (int h = 0; h < 3; ++h) {
        for (int l = 0; l < 3; ++l) {
            if (h == l) continue;
            double ev = 0.0;
            for (int k = 0; k < 3; ++k) ev += flp.alloc(h, k) * c.kl(h, l, k);
            CHECK(ev >= 3.0 - 1e-8);
        }
    }
}

TEST_CASE("FLP two-label closed form holds for any prior") {
    for (double p0 : {0.2, 0.5, 0.8}) {
        Instance cfg;
        cfg.labels = {"a", "b"};
        cfg.expert_types = {"t"};
        cfg.outcomes = {"0", "1"};
        cfg.prior = {p0, 1.0 - p0};
        cfg.mixture = {1.0};
        cfg.rates = {1.0};
        cfg.outcome_tensor = {0.25, 0.75, 0.75, 0.25};
        Instance inst = build_instance(std::move(cfg));
        DerivedConstants c = derive_constants(inst);
        double delta = 1e-2;
        FlpResult flp = solve_flp(inst, c, delta);
        CHECK(flp.m_star_f ==
              doctest::Approx(std::log(1.0 / delta) / c.kl(0, 1, 0)).epsilon(1e-6));
    }
}

TEST_CASE("FLP optimum is exactly linear in ln(1/delta)") {
    Instance inst = animals();
    DerivedConstants c = derive_constants(inst);
    double base = solve_flp(inst, c, std::exp(-1.0)).m_star_f;  // slope per nat
    for (double lg : {2.0, 4.0, 7.5}) {
        FlpResult flp = solve_flp(inst, c, std::exp(-lg));
        CHECK(flp.m_star_f == doctest::Approx(base * lg).epsilon(1e-6));
    }
}

TEST_CASE("b_delta arithmetic") {
    CHECK(b_delta(std::exp(-3.0)) == doctest::Approx(0.81752).epsilon(1e-4 / 0.81752));
    CHECK(b_delta(1e-6) == doctest::Approx(0.97335).epsilon(1e-4 / 0.97335));
    CHECK(lower_bound(std::exp(-3.0), 5.4615) == doctest::Approx(0.81752 * 5.4615).epsilon(1e-3));

    double prev = 0.0;
    for (double lg = 1.0; lg < 14.0; lg += 0.5) {
        double b = b_delta(std::exp(-lg));
        CHECK(b > prev);  // strictly increasing as delta decreases
        prev = b;
    }
    // The multiplier is a useful bound only while positive; the exact formula
    // crosses zero near delta = 0.409 and its intended regime is delta -> 0.
    for (double delta : {0.01, 0.1, 0.2, 0.3, 0.4}) {
        CHECK(b_delta(delta) > 0.0);
        CHECK(b_delta(delta) < 1.0);
    }
    CHECK(b_delta(0.45) < 0.0);
}

TEST_CASE("workload LP: zero weights select the minimum-total specialist") {
    Instance inst = animals();
    DerivedConstants c = derive_constants(inst);
    PolicyParams p = policy_params(inst, c, std::exp(-3.0), 6000);
    std::vector<double> w{0.0, 0.0, 0.0};
    WorkloadVector wv = workload_vector(inst, c, p, 0, w);  // h = cat, specialist type 3
    CHECK(wv.pre_floor[0] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(wv.pre_floor[1] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(wv.pre_floor[2] == doctest::Approx(23.419).epsilon(1e-2 / 23.419));
    CHECK(wv.lambda[0] == 0);
    CHECK(wv.lambda[1] == 0);
    CHECK(wv.lambda[2] == 23);
}

TEST_CASE("workload LP: a huge specialist weight pushes work to the generalist pair") {
    Instance inst = animals();
    DerivedConstants c = derive_constants(inst);
    PolicyParams p = policy_params(inst, c, std::exp(-3.0), 6000);
    std::vector<double> w{0.0, 0.0, 1e6};
    WorkloadVector wv = workload_vector(inst, c, p, 0, w);
    CHECK(wv.pre_floor[0] == doctest::Approx(23.419).epsilon(1e-2 / 23.419));
    CHECK(wv.pre_floor[1] == doctest::Approx(23.419).epsilon(1e-2 / 23.419));
    CHECK(wv.pre_floor[2] == doctest::Approx(0.0).epsilon(1e-9));
    double total = wv.pre_floor[0] + wv.pre_floor[1] + wv.pre_floor[2];
    CHECK(total <= p.v_delta + 1e-8);  // Eq-21 barely satisfied
    CHECK(wv.lambda[0] == 23);
    CHECK(wv.lambda[1] == 23);
    CHECK(wv.lambda[2] == 0);
}

TEST_CASE("workload LP under a tightened budget mixes in the avoided type") {
    Instance inst = animals();
    DerivedConstants c = derive_constants(inst);
    Overrides o;
    o.v_delta = 40.0;
    PolicyParams p = policy_params(inst, c, std::exp(-3.0), 6000, o);
    std::vector<double> w{0.0, 0.0, 1e6};
    WorkloadVector wv = workload_vector(inst, c, p, 0, w);
    CHECK(wv.pre_floor[2] > 1.0);  // forced onto type 3
    double total = wv.pre_floor[0] + wv.pre_floor[1] + wv.pre_floor[2];
    CHECK(total <= 40.0 + 1e-8);
    // evidence rows still hold pre-floor
    for (int l = 1; l < 3; ++l) {
        double ev = 0.0;
        for (int k = 0; k < 3; ++k) ev += wv.pre_floor[k] * c.kl(0, l, k);
        CHECK(ev >= p.evidence_requirement() - 1e-8);
    }
}

TEST_CASE("an impossible budget override is rejected at construction") {
    Instance inst = animals();
    DerivedConstants c = derive_constants(inst);
    Overrides o;
    o.v_delta = 20.0;  // the minimum total is ~23.42
    CHECK_THROWS_AS((void)policy_params(inst, c, std::exp(-3.0), 6000, o), WorkloadLpInfeasible);
}

TEST_CASE("workload LP scale invariance and feasibility on random weights") {
    Instance inst = animals();
    DerivedConstants c = derive_constants(inst);
    PolicyParams p = policy_params(inst, c, std::exp(-3.0), 6000);
    RngStream rng(99, "weights");
    for (int trial = 0; trial < 100; ++trial) {
        int h = rng.next_int(3);
        std::vector<double> w(3);
        for (double& v : w) v = rng.next_u01() * std::pow(10.0, rng.next_int(5));
        WorkloadVector a = workload_vector(inst, c, p, h, w);

        double scale = std::ldexp(1.0, rng.next_int(20) - 10);  // exact dyadic factor
        std::vector<double> ws(w);
        for (double& v : ws) v *= scale;
        WorkloadVector b = workload_vector(inst, c, p, h, ws);
        for (int k = 0; k < 3; ++k) {
            CHECK(a.pre_floor[k] == b.pre_floor[k]);
            CHECK(a.lambda[k] == b.lambda[k]);
        }

        // pre-floor satisfies every constraint; floor respects the budget
        double total = 0.0;
        for (int k = 0; k < 3; ++k) total += a.pre_floor[k];
        CHECK(total <= p.v_delta + 1e-8);
        CHECK(a.total() <= static_cast<long long>(std::ceil(p.v_delta)));
        for (int l = 0; l < 3; ++l) {
            if (l == h) continue;
            double ev = 0.0;
            for (int k = 0; k < 3; ++k) ev += a.pre_floor[k] * c.kl(h, l, k);
            CHECK(ev >= p.evidence_requirement() - 1e-8);
        }
    }
}

TEST_CASE("adaptive stability threshold arithmetic on the animals instance") {
    Instance inst = animals();
    DerivedConstants c = derive_constants(inst);
    PolicyParams p = policy_params(inst, c, std::exp(-3.0), 6000);
    FlpResult flp = solve_flp(inst, c, std::exp(-3.0));
    double t2 = adaptive_stability_threshold(c, p, flp.m_star_f);
    // independent evaluation: (1+(ln6+g)/3)(1+2*9*dbar/(dund*(1/3)*3)) m*
    double f1 = 1.0 + (std::log(6.0) + p.g_delta) / 3.0;
    double f2 = 1.0 + 2.0 * 9.0 * c.d_bar / (c.d_under * (1.0 / 3.0) * 3.0);
    CHECK(t2 == doctest::Approx(f1 * f2 * flp.m_star_f).epsilon(1e-12));
    CHECK(fluid_contraction_threshold(c, p, flp.m_star_f) ==
          doctest::Approx(t2 * (1.0 + 1.0 / 3.0)).epsilon(1e-12));
}
