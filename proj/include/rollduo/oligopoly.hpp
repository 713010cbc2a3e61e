#pragma once

#include "rollduo/market.hpp"
#include "rollduo/valuation.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace rollduo {

struct OligopolyOperator {
    double rho = 1.0;
    double usage = 1.0;  // V under the operator's mechanism
    double psi = 0.0;
    double sigma = 0.0;  // given threshold user type

    double strength() const { return rho * usage; }
};

// Operators sorted by strictly decreasing rho * V. original_index[n] is the
// caller's position of sorted operator n.
struct OligopolyProfile {
    std::vector<OligopolyOperator> ops;
    std::vector<std::size_t> original_index;

    std::size_t size() const { return ops.size(); }
};

// Sorts and validates; ties in rho * V are rejected.
OligopolyProfile make_oligopoly_profile(std::vector<OligopolyOperator> ops);

// xi_n^m = a_m / a_n, indices in sorted order.
double pairwise_xi(const OligopolyProfile& p, std::size_t n, std::size_t m);
double pairwise_neutral(const OligopolyProfile& p, std::size_t n, std::size_t m);

struct CoexistenceResult {
    bool coexist = false;
    std::vector<Interval> shares;  // sorted order
    std::string violated;          // first failing condition when coexist is false
};

CoexistenceResult coexistence_check(const OligopolyProfile& p, double theta_max);

// Profits in sorted order; throws MarketError unless all operators coexist.
std::vector<double> oligopoly_profits(const OligopolyProfile& p, const ValuationDistribution& dist);

}  // namespace rollduo
