#include "rollduo/oligopoly.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace rollduo {

OligopolyProfile make_oligopoly_profile(std::vector<OligopolyOperator> ops) {
    if (ops.size() < 2) throw MarketError("oligopoly needs at least two operators");
    for (const auto& o : ops)
        if (!(o.strength() > 0.0) || !(o.sigma >= 0.0))
            throw MarketError("oligopoly: rho * V must be positive and sigma non-negative");
    OligopolyProfile p;
    p.original_index.resize(ops.size());
    std::iota(p.original_index.begin(), p.original_index.end(), std::size_t{0});
    std::stable_sort(p.original_index.begin(), p.original_index.end(),
                     [&](std::size_t a, std::size_t b) { return ops[a].strength() > ops[b].strength(); });
    for (std::size_t i : p.original_index) p.ops.push_back(ops[i]);
    for (std::size_t n = 0; n + 1 < p.ops.size(); ++n) {
        const double a = p.ops[n].strength(), b = p.ops[n + 1].strength();
        if (std::fabs(a - b) <= kBertrandTol * a) throw MarketError("oligopoly: tied rho * V values are not supported");
    }
    return p;
}

double pairwise_xi(const OligopolyProfile& p, std::size_t n, std::size_t m) {
    if (n >= p.size() || m >= p.size()) throw MarketError("oligopoly: operator index out of range");
    return p.ops[m].strength() / p.ops[n].strength();
}

double pairwise_neutral(const OligopolyProfile& p, std::size_t n, std::size_t m) {
    if (n == m) throw MarketError("pairwise_neutral: n and m must differ");
    const double x = pairwise_xi(p, n, m);
    if (std::fabs(1.0 - x) <= kBertrandTol) throw MarketError("pairwise_neutral: xi = 1");
    return (p.ops[n].sigma - x * p.ops[m].sigma) / (1.0 - x);
}

CoexistenceResult coexistence_check(const OligopolyProfile& p, double theta_max) {
    const std::size_t N = p.size();
    CoexistenceResult r;
    auto sig = [&](std::size_t n) { return p.ops[n].sigma; };
    if (!(0.0 <= sig(N - 1) && sig(N - 1) < sig(N - 2))) {
        r.violated = "0 <= sigma_N < sigma_{N-1}";
        return r;
    }
    for (std::size_t n = 1; n + 1 < N; ++n) {
        const double lhs = (1.0 - pairwise_xi(p, n - 1, n + 1)) * sig(n);
        const double rhs = (1.0 - pairwise_xi(p, n, n + 1)) * sig(n - 1) +
                           (pairwise_xi(p, n, n + 1) - pairwise_xi(p, n - 1, n + 1)) * sig(n + 1);
        if (!(lhs < rhs)) {
            std::ostringstream os;
            os << "ladder condition at operator " << n + 1;
            r.violated = os.str();
            return r;
        }
    }
    const double x12 = pairwise_xi(p, 0, 1);
    if (!((1.0 - x12) * theta_max + x12 * sig(1) > sig(0))) {
        r.violated = "(1 - xi_1^2) theta_max + xi_1^2 sigma_2 > sigma_1";
        return r;
    }
    r.coexist = true;
    r.shares.resize(N);
    r.shares[0] = {pairwise_neutral(p, 0, 1), theta_max};
    for (std::size_t n = 1; n + 1 < N; ++n) r.shares[n] = {pairwise_neutral(p, n, n + 1), pairwise_neutral(p, n - 1, n)};
    r.shares[N - 1] = {sig(N - 1), pairwise_neutral(p, N - 2, N - 1)};
    return r;
}

std::vector<double> oligopoly_profits(const OligopolyProfile& p, const ValuationDistribution& dist) {
    const auto c = coexistence_check(p, dist.theta_max());
    if (!c.coexist) throw MarketError("oligopoly_profits: operators do not coexist (" + c.violated + ")");
    std::vector<double> w(p.size());
    for (std::size_t n = 0; n < p.size(); ++n) {
        const auto& o = p.ops[n];
        const auto& s = c.shares[n];
        const double mass = dist.survival(s.lo) - dist.survival(s.hi);
        w[n] = o.strength() * (o.sigma - o.psi) * mass;
    }
    return w;
}

}  // namespace rollduo
