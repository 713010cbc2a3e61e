#pragma once

// Brute-force references shared by the unit and acceptance tests. They use only
// the partition rule and the valuation cdf, never the solver internals.

#include "rollduo/market.hpp"
#include "rollduo/valuation.hpp"

#include <algorithm>
#include <cmath>

namespace oracle {

struct GridMax {
    double arg = 0.0;
    double value = -1e300;
    double step = 0.0;
};

// Profit of operator `who` (1 or 2) when it sets `own` against `other`, with
// strengths normalized to a1 = 1, a2 = xi.
inline double responder_profit(int who, double own, double other, double psi, double xi,
                               const rollduo::ValuationDistribution& d) {
    const double tm = d.theta_max();
    if (who == 1) {
        const auto p = rollduo::partition(own, other, xi, tm);
        if (p.share1.empty()) return 0.0;
        return (own - psi) * (d.cdf(p.share1.hi) - d.cdf(p.share1.lo));
    }
    const auto p = rollduo::partition(other, own, xi, tm);
    if (p.share2.empty()) return 0.0;
    return xi * (own - psi) * (d.cdf(p.share2.hi) - d.cdf(p.share2.lo));
}

// Grid search over [0, theta_max] with n points.
inline GridMax grid_best_response(int who, double other, double psi, double xi, const rollduo::ValuationDistribution& d,
                                  int n = 10000) {
    GridMax g;
    g.step = d.theta_max() / (n - 1);
    for (int i = 0; i < n; ++i) {
        const double s = i * g.step;
        const double w = responder_profit(who, s, other, psi, xi, d);
        if (w > g.value) {
            g.value = w;
            g.arg = s;
        }
    }
    return g;
}

// Operator a user of type theta picks given thresholds (0 = outside option).
inline int user_choice(double theta, double a1, double s1, double a2, double s2) {
    const double u1 = a1 * (theta - s1), u2 = a2 * (theta - s2);
    if (u1 < 0.0 && u2 < 0.0) return 0;
    return u1 >= u2 ? 1 : 2;
}

inline int assigned(const rollduo::MarketPartition& p, double theta) {
    auto in = [&](const rollduo::Interval& iv) { return !iv.empty() && theta > iv.lo && theta < iv.hi; };
    if (in(p.share1)) return 1;
    if (in(p.share2)) return 2;
    return 0;
}

}  // namespace oracle
