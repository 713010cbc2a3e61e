#include "rollduo/mechanism_game.hpp"

#include "doctest.h"

#include <algorithm>
#include <cmath>

using namespace rollduo;

namespace {

constexpr auto T = Mechanism::T;
constexpr auto R = Mechanism::R;

MechanismMatrix synthetic(double rt1, double rt2, double rr1, double rr2, double tr1, double tr2, double tt1,
                          double tt2) {
    MechanismMatrix m;
    m.at(R, T) = {rt1, rt2, {}};
    m.at(R, R) = {rr1, rr2, {}};
    m.at(T, R) = {tr1, tr2, {}};
    m.at(T, T) = {tt1, tt2, {}};
    return m;
}

// usage pair with a flexibility gap, in data units
const UsagePair kUsage{90.0, 100.0};

}  // namespace

TEST_CASE("nash_pure enumeration") {
    SUBCASE("dominant strategies") {
        const auto me = nash_pure(synthetic(5, 5, 4, 3, 3, 4, 2, 2));
        REQUIRE(me.equilibria.size() == 1);
        CHECK(me.label == "RT");
    }
    SUBCASE("anti-coordination") {
        const auto me = nash_pure(synthetic(5, 3, 2, 1, 3, 5, 1, 2));
        CHECK(me.label == "RT+TR");
        CHECK(me.equilibria.size() == 2);
    }
    SUBCASE("Na collapse needs the weaker operator shut out in both cells") {
        auto m = synthetic(4, 0, 4, 0, 1, 0, 1, 0);
        CHECK(nash_pure(m).label == "RT+RR");  // regimes still default to coexistence
        m.at(R, T).eq.regime = Regime::Mono1Strong;
        m.at(R, R).eq.regime = Regime::Mono1Weak;
        const auto me = nash_pure(m);
        CHECK(me.label == "RNa");
        CHECK(me.nash_mode == MarketMode::Mno1Surviving);
    }
    SUBCASE("mirror collapse") {
        auto m = synthetic(0, 1, 0, 3, 0, 3, 0, 0.5);
        m.at(T, R).eq.regime = Regime::Mono2Strong;
        m.at(R, R).eq.regime = Regime::Mono2Strong;
        const auto me = nash_pure(m);
        CHECK(me.label == "NaR");
        CHECK(me.nash_mode == MarketMode::Mno2Surviving);
    }
    SUBCASE("matching pennies has no pure equilibrium") {
        const auto me = nash_pure(synthetic(1, 0, 0, 1, 1, 0, 0, 1));
        CHECK(me.label == "none");
        CHECK_FALSE(me.consistent);
    }
}

TEST_CASE("single-survivor cost thresholds") {
    const auto u = make_uniform(1.0);
    CHECK(c_single_1(1.0, 1.0, 0.5, 0.9, 1.0, u) == doctest::Approx(0.45));
    CHECK(c_single_1(1.0, 0.8, 0.4, 1.0, 1.0, u) == doctest::Approx(0.4));
    CHECK(c_single_1(1.0, 1.0, 1.0, 0.9, 1.0, u) == doctest::Approx(1.0));
    // branches 0.5 (0.9 - 0.6 * 0.1) and 0.9 - 0.5 - 0.5 * 0.2; the larger one counts
    CHECK(c_single_2(1.0, 0.5, 0.9, 0.2, 1.0, u) == doctest::Approx(0.42));
    CHECK(c_single_2(1.0, 0.91, 0.01, 0.9, 1.0, u) <= 0.0);
    // symmetric when QoS and usage match
    for (double c : {0.2, 0.5, 0.7})
        CHECK(c_single_2(1.0, 1.0, c, 1.0, 1.0, u) == doctest::Approx(c_single_1(1.0, 1.0, c, 1.0, 1.0, u)));
}

TEST_CASE("QoS flip") {
    CHECK(qos_flip(1.0, 0.95, 0.9, 1.0));
    CHECK_FALSE(qos_flip(1.0, 0.85, 0.9, 1.0));
    CHECK(qos_flip(1.0, 1.0, 0.99, 1.0));
}

TEST_CASE("payoff matrix") {
    const auto d = make_uniform(1.0);
    SUBCASE("symmetric operators") {
        OperatorProfile op{1.0, 20.0, 1, T};
        const auto g = make_truncated_gamma(4.5, 50.0);
        const auto m = payoff_matrix(op, kUsage, op, kUsage, g);
        for (Mechanism a : {T, R})
            for (Mechanism b : {T, R}) {
                CHECK(m.at(a, b).W1 == doctest::Approx(m.at(b, a).W2).epsilon(1e-10));
            }
    }
    SUBCASE("sequential and concurrent cells agree") {
        OperatorProfile o1{1.0, 0.2, 1, T}, o2{0.9, 0.25, 1, T};
        MatrixOptions seq;
        seq.concurrent_cells = false;
        const auto a = payoff_matrix(o1, {0.9, 1.0}, o2, {0.9, 1.0}, d);
        const auto b = payoff_matrix(o1, {0.9, 1.0}, o2, {0.9, 1.0}, d, seq);
        for (Mechanism x : {T, R})
            for (Mechanism y : {T, R}) CHECK(a.at(x, y).W1 == b.at(x, y).W1);
    }
    SUBCASE("cost at or above theta_max is rejected") {
        OperatorProfile o1{1.0, 1.2, 1, T}, o2{0.9, 0.25, 1, T};
        CHECK_THROWS_AS(payoff_matrix(o1, kUsage, o2, kUsage, d), MarketError);
    }
}

TEST_CASE("coexistence: rollover beats traditional for the stronger operator") {
    const auto d = make_uniform(1.0);
    const UsagePair u{0.9, 1.0};
    for (double c1 : {0.1, 0.2, 0.3})
        for (double c2 : {0.15, 0.25}) {
            OperatorProfile o1{1.0, c1, 1, T}, o2{0.95, c2, 1, T};
            if (single_survivor_mode(1.0, c1, 0.95, c2, u, u, d) != MarketMode::Coexistence) continue;
            const auto me = classify_mechanism_equilibrium(o1, u, o2, u, d);
            CHECK(me.matrix.at(R, T).W1 > me.matrix.at(T, T).W1);
            for (const auto& p : me.equilibria) CHECK(p != MechanismPair{T, T});
        }
}

TEST_CASE("equilibria withstand deviations recomputed from scratch") {
    const auto g = make_truncated_gamma(4.5, 11.0);
    const UsagePair u{80.0, 92.0};
    for (double c1 : {0.05, 0.2, 0.35})
        for (double c2 : {0.1, 0.3}) {
            OperatorProfile o1{1.0, c1, 1, T}, o2{0.93, c2, 1, T};
            const auto me = classify_mechanism_equilibrium(o1, u, o2, u, g);
            const double e = 1e-9 * me.matrix.max_profit();
            for (const auto& [k1, k2] : me.equilibria) {
                auto w = [&](Mechanism a, Mechanism b) {
                    return solve_pricing(o1.rho * u.of(a), o1.psi(), o2.rho * u.of(b), o2.psi(), g);
                };
                const auto here = w(k1, k2);
                CHECK(here.W1 >= w(k1 == T ? R : T, k2).W1 - e);
                CHECK(here.W2 >= w(k1, k2 == T ? R : T).W2 - e);
            }
        }
}

TEST_CASE("classification is invariant under operator relabeling") {
    const auto g = make_truncated_gamma(4.5, 11.0);
    const UsagePair u1{80.0, 92.0}, u2{78.0, 90.0};
    OperatorProfile o1{1.0, 0.3, 1, T}, o2{0.95, 0.35, 1, T};
    const auto a = classify_mechanism_equilibrium(o1, u1, o2, u2, g);
    const auto b = classify_mechanism_equilibrium(o2, u2, o1, u1, g);
    CHECK(b.swapped);
    REQUIRE(a.equilibria.size() == b.equilibria.size());
    for (std::size_t i = 0; i < a.equilibria.size(); ++i) {
        const auto [x, y] = a.equilibria[i];
        CHECK(std::find(b.equilibria.begin(), b.equilibria.end(), MechanismPair{y, x}) != b.equilibria.end());
    }
    for (Mechanism x : {T, R})
        for (Mechanism y : {T, R}) CHECK(a.matrix.at(x, y).W1 == doctest::Approx(b.matrix.at(y, x).W2));
}

TEST_CASE("rollover cost thresholds") {
    const auto g = make_truncated_gamma(4.5, 11.0);
    const UsagePair u{80.0, 92.0};
    const auto t = c_roll_1(1.0, 0.91, 0.4, u, u, g, 48);
    CHECK(std::isfinite(t.value));
    CHECK(t.value >= t.lo);
    CHECK(t.value <= t.hi);
    if (t.binding) {
        // profit difference changes sign across the reported threshold
        auto diff = [&](double c1) {
            return solve_pricing(u.VR, c1, 0.91 * u.VR, 0.4 / 0.91, g).W1 -
                   solve_pricing(u.VT, c1, 0.91 * u.VR, 0.4 / 0.91, g).W1;
        };
        const double h = 1e-3 * (t.hi - t.lo);
        if (t.value - h > t.lo && t.value + h < t.hi) CHECK((diff(t.value - h) > 0) != (diff(t.value + h) > 0));
    }
    const auto t2 = c_roll_2(1.0, 0.91, 0.4, u, u, g, 48);
    CHECK((std::isnan(t2.value) || (t2.value >= t2.lo && t2.value <= t2.hi)));
}
