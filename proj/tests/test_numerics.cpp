#include "rollduo/numerics.hpp"

#include "doctest.h"

#include <cmath>
#include <limits>

using namespace rollduo;

TEST_CASE("bracketed_root finds simple roots") {
    CHECK(bracketed_root({[](double x) { return x - 0.6; }, 0.0, 1.0}, 1e-12) == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(bracketed_root({[](double x) { return x * x - 2.0; }, 1.0, 2.0}, 1e-13) ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    // uniform monopoly condition, psi = 0.2
    const double s = bracketed_root({[](double x) { return x - (1.0 - x) - 0.2; }, 0.0, 1.0}, 1e-12);
    CHECK(std::abs(s - 0.6) < 1e-11);
}

TEST_CASE("bracketed_root works on decreasing functions and endpoint roots") {
    CHECK(bracketed_root({[](double x) { return 0.3 - x; }, 0.0, 1.0}, 1e-13) == doctest::Approx(0.3));
    CHECK(bracketed_root({[](double x) { return x; }, 0.0, 1.0}) == 0.0);
}

TEST_CASE("bracketed_root errors") {
    CHECK_THROWS_AS(bracketed_root({[](double x) { return x + 1.0; }, 0.0, 1.0}), NoSignChange);
    CHECK_THROWS_AS(bracketed_root({[](double) { return std::numeric_limits<double>::quiet_NaN(); }, 0.0, 1.0}),
                    NonFiniteValue);
}

TEST_CASE("bracketed_root is independent of bracket for a monotone function") {
    auto f = [](double x) { return std::exp(x) - 3.0; };
    const double a = bracketed_root({f, 0.0, 5.0}, 1e-14);
    const double b = bracketed_root({f, 1.0, 1.2}, 1e-14);
    CHECK(std::abs(a - b) < 1e-13);
    CHECK(std::abs(a - std::log(3.0)) < 1e-13);
}

TEST_CASE("clamped_increasing_root clamps to the interval ends") {
    CHECK(clamped_increasing_root([](double x) { return x + 1.0; }, 0.0, 1.0) == 0.0);
    CHECK(clamped_increasing_root([](double x) { return x - 2.0; }, 0.0, 1.0) == 1.0);
    CHECK(clamped_increasing_root([](double x) { return x - 0.25; }, 0.0, 1.0, 1e-13) == doctest::Approx(0.25));
}

TEST_CASE("fixed_point_pair") {
    SUBCASE("identity") {
        auto r = fixed_point_pair([](double x, double y) { return std::pair{x, y}; }, {0.3, 0.7}, 1e-12);
        CHECK(r.x1 == 0.3);
        CHECK(r.x2 == 0.7);
    }
    SUBCASE("contraction to origin") {
        auto r = fixed_point_pair([](double x, double y) { return std::pair{y / 2, x / 2}; }, {1.0, 1.0}, 1e-12);
        CHECK(std::abs(r.x1) < 1e-11);
        CHECK(std::abs(r.x2) < 1e-11);
    }
    SUBCASE("uniform interior best responses") {
        const double xi = 0.5, p1 = 0.1, p2 = 0.2;
        PairMap m = [&](double s1, double s2) {
            return std::pair{(p1 + (1 - xi) + xi * s2) / 2, (s1 + p2) / 2};
        };
        auto r = fixed_point_pair(m, {0.5, 0.5}, 1e-14);
        CHECK(std::abs(r.x1 - 13.0 / 35.0) < 1e-12);
        CHECK(std::abs(r.x2 - 2.0 / 7.0) < 1e-12);
        auto [a, b] = m(r.x1, r.x2);
        CHECK(std::abs(a - r.x1) <= 1e-14);
        CHECK(std::abs(b - r.x2) <= 1e-14);
    }
    SUBCASE("non-convergence") {
        CHECK_THROWS_AS(fixed_point_pair([](double x, double y) { return std::pair{y + 1, x}; }, {0.0, 0.0}, 1e-12, 50),
                        NoConvergence);
    }
}
