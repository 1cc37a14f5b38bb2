#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "ips/capacity.hpp"
#include "ips/instance.hpp"
#include "ips/llr.hpp"
#include "ips/rng.hpp"

using namespace ips;

namespace {

Instance animals() { return load_instance_file(IPS_ANIMALS_JSON); }

constexpr int kCat = 0, kDog = 1, kRabbit = 2;

}  // namespace

TEST_CASE("fresh state is the empty product") {
    LlrState s(3);
    CHECK(s.n_inspections() == 0);
    for (int h = 0; h < 3; ++h)
        for (int l = 0; l < 3; ++l) CHECK(s.s(h, l) == 0.0);
}

TEST_CASE("one inspection updates all pairs with exact antisymmetry") {
    Instance inst = animals();
    LlrState s(3);
    // type-3 expert (index 2), outcome "1"
    s = llr_update(std::move(s), inst, InspectionRecord{2, 1});
    CHECK(s.n_inspections() == 1);
    CHECK(s.s(kCat, kDog) == doctest::Approx(std::log(0.25 / 0.75)).epsilon(1e-12));
    CHECK(s.s(kCat, kDog) == doctest::Approx(-1.098612).epsilon(1e-6));
    CHECK(s.s(kDog, kCat) == -s.s(kCat, kDog));  // bitwise, not approximate
    CHECK(s.s(kDog, kRabbit) == 0.0);            // both see Bernoulli(0.75)
}

TEST_CASE("llr magnitudes are bounded by n * z_bar") {
    Instance inst = animals();
    DerivedConstants c = derive_constants(inst);
    RngStream rng(11, "bound");
    LlrState s(3);
    for (int j = 0; j < 200; ++j) {
        int k = rng.next_int(3);
        int x = rng.next_int(2);
        s = llr_update(std::move(s), inst, InspectionRecord{k, x});
        for (int h = 0; h < 3; ++h)
            for (int l = 0; l < 3; ++l)
                CHECK(std::abs(s.s(h, l)) <= s.n_inspections() * c.z_bar + 1e-9);
    }
}

TEST_CASE("ml_estimate tie-breaks to the lowest label index") {
    LlrState s(3);
    CHECK(ml_estimate(s) == kCat);
}

TEST_CASE("ml_estimate follows the likelihoods") {
    Instance inst = animals();
    LlrState s(3);
    s = llr_update(std::move(s), inst, InspectionRecord{2, 1});
    // likelihoods: cat 0.25, dog 0.75, rabbit 0.75; dog precedes rabbit
    CHECK(ml_estimate(s) == kDog);

    LlrState s2(3);
    s2 = llr_update(std::move(s2), inst, InspectionRecord{2, 0});
    s2 = llr_update(std::move(s2), inst, InspectionRecord{2, 0});
    // likelihood cat = 0.75^2, others 0.25^2
    CHECK(ml_estimate(s2) == kCat);
}

TEST_CASE("check_certificate requires every pair to clear the margin") {
    LlrState zero(3);
    CHECK(!check_certificate(zero, 1.0).has_value());

    LlrState two = LlrState::from_matrix(2, {0.0, 5.0, -5.0, 0.0});
    CHECK(check_certificate(two, 4.6) == 0);
    CHECK(!check_certificate(two, 5.5).has_value());

    // S(0,1)=7, S(0,2)=3 with threshold 5: one pair is below
    LlrState three = LlrState::from_matrix(3, {0.0, 7.0, 3.0, -7.0, 0.0, 1.0, -3.0, -1.0, 0.0});
    CHECK(!check_certificate(three, 5.0).has_value());
    CHECK(check_certificate(three, 3.0) == 0);
}

TEST_CASE("order invariance: permuting the records leaves the state equal") {
    Instance inst = animals();
    RngStream rng(5, "order");
    std::vector<InspectionRecord> records;
    for (int j = 0; j < 64; ++j) records.push_back({rng.next_int(3), rng.next_int(2)});

    LlrState a(3);
    for (const auto& r : records) a = llr_update(std::move(a), inst, r);

    std::vector<InspectionRecord> shuffled = records;
    for (int i = static_cast<int>(shuffled.size()) - 1; i > 0; --i)
        std::swap(shuffled[i], shuffled[rng.next_int(i + 1)]);
    LlrState b(3);
    for (const auto& r : shuffled) b = llr_update(std::move(b), inst, r);

    for (int h = 0; h < 3; ++h)
        for (int l = 0; l < 3; ++l) CHECK(a.s(h, l) == doctest::Approx(b.s(h, l)).epsilon(1e-12));
    CHECK(ml_estimate(a) == ml_estimate(b));
}

TEST_CASE("ml_estimate is invariant under positive scaling of the matrix") {
    Instance inst = animals();
    RngStream rng(9, "scale");
    for (int trial = 0; trial < 40; ++trial) {
        LlrState s(3);
        int n = 1 + rng.next_int(30);
        for (int j = 0; j < n; ++j)
            s = llr_update(std::move(s), inst, InspectionRecord{rng.next_int(3), rng.next_int(2)});
        int base = ml_estimate(s);
        for (double lambda : {0.25, 4.0, 1e6}) {
            std::vector<double> scaled(9);
            for (int h = 0; h < 3; ++h)
                for (int l = 0; l < 3; ++l)
                    scaled[static_cast<std::size_t>(h) * 3 + l] = lambda * s.s(h, l);
            CHECK(ml_estimate(LlrState::from_matrix(3, scaled, s.n_inspections())) == base);
        }
    }
}

TEST_CASE("certified departures respect the error bound (Monte Carlo)") {
    Instance inst = animals();
    DerivedConstants c = derive_constants(inst);
    const double delta = 0.05;
    const double x = std::log(2.0 * 3.0 / delta);
    const double bound = 3.0 * std::exp(-x);  // = delta/2

    RngStream label_rng(1234, "mc_label");
    RngStream type_rng(1234, "mc_type");
    RngStream out_rng(1234, "mc_out");

    long long certified = 0, wrong = 0;
    const int cap = 400;
    for (int i = 0; i < 20000; ++i) {
        int truth = label_rng.next_categorical(inst.prior);
        LlrState s(3);
        for (int j = 0; j < cap; ++j) {
            int k = type_rng.next_categorical(c.r);
            int out = out_rng.next_categorical(inst.outcome_dist(truth, k));
            llr_update_inplace(s, inst, InspectionRecord{k, out});
            if (auto h = check_certificate(s, x)) {
                ++certified;
                if (*h != truth) ++wrong;
                break;
            }
        }
    }
    CHECK(certified > 15000);
    CHECK(binomial_upper_ok(wrong, certified, bound));
}
