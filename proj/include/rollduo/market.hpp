#pragma once

#include "rollduo/demand.hpp"
#include "rollduo/valuation.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace rollduo {

struct MarketError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OperatorProfile {
    double rho = 1.0;
    double cost = 0.0;  // money per data unit
    int cap = 1;        // data units
    Mechanism kappa = Mechanism::T;

    double psi() const { return cost / rho; }
};

struct PricingStrategy {
    double subscription = 0.0;  // Pi, money per month
    double overage = 0.0;       // pi, money per data unit
};

enum class Region { Sigma1, Sigma2, Sigma3, Bertrand1, Bertrand2 };

std::string to_string(Region r);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool empty() const { return !(hi > lo); }
    double length() const { return empty() ? 0.0 : hi - lo; }
};

struct MarketPartition {
    Region region = Region::Sigma2;
    Interval share1;
    Interval share2;
    std::optional<double> neutral;
    double sigma1 = 0.0;
    double sigma2 = 0.0;
};

// Difference between xi and 1 below which the duopoly is treated as Bertrand.
inline constexpr double kBertrandTol = 1e-12;

double expected_user_payoff(const OperatorProfile& op, const PricingStrategy& s, double theta,
                            const RolloverProfile& rp);
double threshold_type(const OperatorProfile& op, const PricingStrategy& s, const RolloverProfile& rp);
PricingStrategy prices_for_threshold(double sigma, double overage_fee, const RolloverProfile& rp, double rho);
// Largest overage fee that keeps the subscription fee non-negative at sigma.
double max_overage_fee(double sigma, const RolloverProfile& rp, double rho);

double xi(const OperatorProfile& op1, const OperatorProfile& op2, const RolloverProfile& rp1,
          const RolloverProfile& rp2);
double neutral_type(double sigma1, double sigma2, double xi);
MarketPartition partition(double sigma1, double sigma2, double xi, double theta_max);

// Profits from the reduced form, with a_n = rho_n V_n.
std::pair<double, double> operator_profits(const MarketPartition& part, double a1, double psi1, double a2,
                                           double psi2, const ValuationDistribution& dist);
std::pair<double, double> operator_profits(const MarketPartition& part, const OperatorProfile& op1,
                                           const OperatorProfile& op2, const RolloverProfile& rp1,
                                           const RolloverProfile& rp2, const ValuationDistribution& dist);

// Revenue minus cost integrated over each share by quadrature, for a given
// price pair. Independent of the reduced form above.
std::pair<double, double> operator_profits_integral(const MarketPartition& part, const OperatorProfile& op1,
                                                    const PricingStrategy& s1, const RolloverProfile& rp1,
                                                    const OperatorProfile& op2, const PricingStrategy& s2,
                                                    const RolloverProfile& rp2,
                                                    const ValuationDistribution& dist);

}  // namespace rollduo
