#include "rollduo/oligopoly.hpp"

#include "doctest.h"

#include <cmath>

using namespace rollduo;

namespace {

// strengths 1, 0.8, 0.5 with a valid ladder on [0, 1]
OligopolyProfile three() {
    return make_oligopoly_profile({{1.0, 0.5, 0.2, 0.3}, {1.0, 1.0, 0.1, 0.5}, {1.0, 0.8, 0.2, 0.42}});
}

}  // namespace

TEST_CASE("profile ordering and validation") {
    const auto p = three();
    CHECK(p.ops[0].strength() == 1.0);
    CHECK(p.ops[2].strength() == 0.5);
    CHECK(p.original_index[0] == 1);
    CHECK(p.original_index[1] == 2);
    CHECK(p.original_index[2] == 0);
    CHECK_THROWS_AS(make_oligopoly_profile({{1.0, 1.0, 0.1, 0.5}}), MarketError);
    CHECK_THROWS_AS(make_oligopoly_profile({{1.0, 1.0, 0.1, 0.5}, {0.5, 2.0, 0.1, 0.4}}), MarketError);
}

TEST_CASE("pairwise neutral types") {
    const auto p = make_oligopoly_profile({{1.0, 1.0, 0.0, 0.6}, {1.0, 0.5, 0.0, 0.4}});
    CHECK(pairwise_xi(p, 0, 1) == 0.5);
    CHECK(pairwise_neutral(p, 0, 1) == doctest::Approx(0.8));
    CHECK(pairwise_neutral(p, 0, 1) == doctest::Approx(neutral_type(0.6, 0.4, 0.5)).epsilon(1e-15));
    const auto q = make_oligopoly_profile({{1.0, 1.0, 0.0, 0.4}, {1.0, 0.5, 0.0, 0.4}});
    CHECK(pairwise_neutral(q, 0, 1) == doctest::Approx(0.4));
    CHECK_THROWS_AS(pairwise_neutral(p, 1, 1), MarketError);
}

TEST_CASE("two operators reduce to the duopoly") {
    const auto d = make_uniform(1.0);
    const auto p = make_oligopoly_profile({{1.0, 1.0, 0.1, 0.5}, {1.0, 0.5, 0.2, 0.4}});
    const auto c = coexistence_check(p, 1.0);
    REQUIRE(c.coexist);
    const auto part = partition(0.5, 0.4, 0.5, 1.0);
    CHECK(std::abs(c.shares[0].lo - part.share1.lo) < 1e-12);
    CHECK(std::abs(c.shares[1].lo - part.share2.lo) < 1e-12);
    CHECK(std::abs(c.shares[1].hi - part.share2.hi) < 1e-12);
    const auto w = oligopoly_profits(p, d);
    const auto [w1, w2] = operator_profits(part, 1.0, 0.1, 0.5, 0.2, d);
    CHECK(std::abs(w[0] - w1) <= 1e-12);
    CHECK(std::abs(w[1] - w2) <= 1e-12);
}

TEST_CASE("coexistence conditions") {
    CHECK_FALSE(coexistence_check(make_oligopoly_profile({{1.0, 1.0, 0.1, 0.5}, {1.0, 0.5, 0.2, 0.5}}), 1.0).coexist);
    const auto r = coexistence_check(
        make_oligopoly_profile({{1.0, 1.0, 0.1, 0.5}, {1.0, 0.8, 0.2, 0.47}, {1.0, 0.5, 0.2, 0.3}}), 1.0);
    CHECK_FALSE(r.coexist);
    CHECK(r.violated.find("ladder") != std::string::npos);
    const auto top = coexistence_check(make_oligopoly_profile({{1.0, 1.0, 0.1, 0.95}, {1.0, 0.5, 0.2, 0.4}}), 1.0);
    CHECK_FALSE(top.coexist);
    CHECK_THROWS_AS(oligopoly_profits(make_oligopoly_profile({{1.0, 1.0, 0.1, 0.95}, {1.0, 0.5, 0.2, 0.4}}),
                                      make_uniform(1.0)),
                    MarketError);
}

TEST_CASE("three-operator ladder matches the payoff argmax") {
    const auto p = three();
    const auto c = coexistence_check(p, 1.0);
    REQUIRE(c.coexist);
    CHECK(c.shares[0].lo == doctest::Approx(0.82));
    CHECK(c.shares[1].lo == doctest::Approx(0.62));
    CHECK(c.shares[2].lo == doctest::Approx(0.3));
    const int n = 10000;
    int bad = 0;
    for (int i = 0; i < n; ++i) {
        const double t = (i + 0.5) / n;
        int best = -1;
        double u = 0.0;
        for (std::size_t k = 0; k < p.size(); ++k) {
            const double v = p.ops[k].strength() * (t - p.ops[k].sigma);
            if (v > u) {
                u = v;
                best = static_cast<int>(k);
            }
        }
        int got = -1;
        for (std::size_t k = 0; k < c.shares.size(); ++k)
            if (t > c.shares[k].lo && t < c.shares[k].hi) got = static_cast<int>(k);
        if (got != best) ++bad;
    }
    CHECK(bad == 0);
}

TEST_CASE("oligopoly profits") {
    const auto d = make_truncated_gamma(3.0, 0.2);
    const double tm = d.theta_max();
    auto p = make_oligopoly_profile({{1.0, 1.0, 0.2 * tm, 0.5 * tm},
                                     {1.0, 0.8, 0.1 * tm, 0.42 * tm},
                                     {1.0, 0.5, 0.3 * tm, 0.3 * tm}});
    const auto w = oligopoly_profits(p, d);
    CHECK(w[2] == 0.0);  // zero margin
    const auto c = coexistence_check(p, tm);
    double served = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) served += d.cdf(c.shares[k].hi) - d.cdf(c.shares[k].lo);
    CHECK(served == doctest::Approx(d.survival(0.3 * tm)).epsilon(1e-12));
    for (std::size_t k = 0; k < 2; ++k) CHECK(w[k] > 0.0);
}
