#include "rollduo/demand.hpp"

#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace rollduo;

namespace {

// Power iteration on the chain built from its definition (aperiodic when every
// demand level has positive mass).
std::vector<double> oracle_stationary(const DemandModel& dm, int Q, int steps = 5000) {
    std::vector<double> p(Q + 1, 0.0);
    p[0] = 1.0;
    for (int s = 0; s < steps; ++s) {
        std::vector<double> next(Q + 1, 0.0);
        for (int tau = 0; tau <= Q; ++tau)
            for (int d = 0; d <= dm.max_units(); ++d)
                next[std::max(0, Q - std::max(0, d - tau))] += p[tau] * dm.pmf[d];
        p = next;
    }
    return p;
}

double oracle_overage(const DemandModel& dm, int Q, const std::vector<double>& p) {
    double a = 0.0;
    for (int tau = 0; tau <= Q; ++tau)
        for (int d = 0; d <= dm.max_units(); ++d) a += p[tau] * dm.pmf[d] * std::max(0, d - Q - tau);
    return a;
}

DemandModel random_demand(std::mt19937_64& rng, int D) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> pmf(D + 1);
    for (double& v : pmf) v = u(rng);
    return make_demand_from_pmf(pmf, 10.0);
}

}  // namespace

TEST_CASE("truncated lognormal demand") {
    const auto dm = make_truncated_lognormal_demand(100.0, 1000, 1.0, 10.0);
    CHECK(std::accumulate(dm.pmf.begin(), dm.pmf.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(dm.mean >= 99.9);
    CHECK(dm.mean <= 100.1);
    CHECK(dm.max_units() == 1000);

    const auto narrow = make_truncated_lognormal_demand(50.0, 100, 0.01, 10.0);
    const auto mode = std::max_element(narrow.pmf.begin(), narrow.pmf.end()) - narrow.pmf.begin();
    CHECK(mode == 50);
    double near = 0.0;
    for (int d = 48; d <= 52; ++d) near += narrow.pmf[d];
    CHECK(near > 0.999);
}

TEST_CASE("demand construction errors") {
    CHECK_THROWS_AS(make_demand_from_pmf({1.0}, 10.0), DemandError);
    CHECK_THROWS_AS(make_demand_from_pmf({0.0, 0.0}, 10.0), DemandError);
    CHECK_THROWS_AS(make_demand_from_pmf({0.5, -0.1, 0.6}, 10.0), DemandError);
    CHECK_THROWS_AS(make_truncated_lognormal_demand(200.0, 100, 1.0, 10.0), DemandError);
    CHECK_THROWS_AS(make_truncated_lognormal_demand(50.0, 100, 0.0, 10.0), DemandError);
}

TEST_CASE("toy chain: uniform demand on {0,1,2}, Q = 1") {
    const auto dm = make_uniform_demand(0, 2, 10.0);
    const auto p = rollover_stationary(dm, 1);
    REQUIRE(p.size() == 2);
    CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(p[1] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(stationary_residual(dm, 1, p) <= 1e-12);
    CHECK(expected_overage(dm, 1, Mechanism::T) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(expected_overage(dm, 1, Mechanism::R) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
    CHECK(expected_usage(dm, 1, 0.8, Mechanism::T) == doctest::Approx(1.0 - 0.8 / 3.0).epsilon(1e-12));
    CHECK(expected_usage(dm, 1, 0.8, Mechanism::R) == doctest::Approx(1.0 - 0.8 / 6.0).epsilon(1e-12));

    const auto mc = simulate_rollover(dm, 1, 200000, 7);
    CHECK(std::abs(mc.mean_overage - 1.0 / 6.0) < 4.0 * mc.std_error);
    CHECK(mc.occupancy[0] == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("point-mass demand") {
    SUBCASE("demand equal to the cap never rolls over") {
        const auto dm = make_point_mass_demand(5, 10, 10.0);
        const auto p = rollover_stationary(dm, 5);
        CHECK(p[0] == doctest::Approx(1.0));
        CHECK(expected_overage(dm, 5, Mechanism::R) == 0.0);
    }
    SUBCASE("zero demand keeps a full balance") {
        const auto dm = make_point_mass_demand(0, 10, 10.0);
        const auto p = rollover_stationary(dm, 4);
        CHECK(p[4] == doctest::Approx(1.0));
    }
}

TEST_CASE("cap at or above the support has no overage") {
    const auto dm = make_uniform_demand(0, 8, 10.0);
    CHECK(expected_overage(dm, 8, Mechanism::T) == 0.0);
    CHECK(expected_overage(dm, 8, Mechanism::R) == 0.0);
}

TEST_CASE("beta = 0 gives usage equal to mean demand") {
    const auto dm = make_truncated_lognormal_demand(30.0, 200, 0.8, 10.0);
    CHECK(expected_usage(dm, 20, 0.0, Mechanism::T) == doctest::Approx(dm.mean).epsilon(1e-14));
    CHECK(expected_usage(dm, 20, 0.0, Mechanism::R) == doctest::Approx(dm.mean).epsilon(1e-14));
    CHECK_THROWS_AS(expected_usage(dm, 20, 1.5, Mechanism::T), DemandError);
}

TEST_CASE("transition matrix is row-stochastic") {
    std::mt19937_64 rng(11);
    const auto dm = random_demand(rng, 30);
    const int Q = 12;
    const auto P = rollover_transition(dm, Q);
    REQUIRE(P.size() == static_cast<std::size_t>((Q + 1) * (Q + 1)));
    for (int i = 0; i <= Q; ++i) {
        double s = 0.0;
        for (int j = 0; j <= Q; ++j) {
            CHECK(P[i * (Q + 1) + j] >= 0.0);
            s += P[i * (Q + 1) + j];
        }
        CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("stationary distribution and overage match a power-iteration oracle") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 6; ++trial) {
        const int D = 10 + 5 * trial;
        const auto dm = random_demand(rng, D);
        for (int Q : {1, D / 3, D / 2, D - 1}) {
            const auto p = rollover_stationary(dm, Q);
            const auto o = oracle_stationary(dm, Q);
            CHECK(stationary_residual(dm, Q, p) <= 1e-12);
            for (int i = 0; i <= Q; ++i) CHECK(std::abs(p[i] - o[i]) < 1e-10);
            CHECK(std::abs(expected_overage(dm, Q, Mechanism::R) - oracle_overage(dm, Q, o)) < 1e-10);
        }
    }
}

TEST_CASE("stationary solve with deterministic demand above the cap") {
    const auto dm = make_demand_from_pmf({0.0, 0.0, 0.0, 0.0, 1.0}, 10.0);
    const auto p = rollover_stationary(dm, 2);
    CHECK(stationary_residual(dm, 2, p) <= 1e-12);
    CHECK(p[0] == doctest::Approx(1.0));
}

TEST_CASE("overage is non-increasing in the cap, and rollover never adds overage") {
    std::mt19937_64 rng(5);
    const auto dm = random_demand(rng, 40);
    double prev_t = 1e300, prev_r = 1e300;
    for (int Q = 1; Q <= 40; ++Q) {
        const double at = expected_overage(dm, Q, Mechanism::T);
        const double ar = expected_overage(dm, Q, Mechanism::R);
        CHECK(at <= prev_t + 1e-14);
        CHECK(ar <= prev_r + 1e-12);
        CHECK(ar <= at + 1e-14);
        prev_t = at;
        prev_r = ar;
    }
}

TEST_CASE("rollover profile") {
    const auto dm = make_uniform_demand(0, 2, 10.0);
    const auto rp = make_rollover_profile(dm, 1, 0.8, Mechanism::R);
    CHECK(rp.expected_usage == doctest::Approx(1.0 - 0.8 / 6.0));
    CHECK(rp.mean_demand == doctest::Approx(1.0));
    CHECK_THROWS_AS(make_rollover_profile(dm, 0, 0.8, Mechanism::T), DemandError);
    CHECK_THROWS_AS(make_rollover_profile(dm, 3, 0.8, Mechanism::T), DemandError);
}
