#include "rollduo/market.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace rollduo {

namespace {

double overage_loss(const RolloverProfile& rp) {
    if (!(rp.beta > 0.0)) throw MarketError("beta = 0 is not supported (payoff contains 1/beta)");
    return (1.0 / rp.beta - 1.0) * (rp.mean_demand - rp.expected_usage);
}

double mass(const Interval& iv, const ValuationDistribution& dist) {
    if (iv.empty()) return 0.0;
    return std::max(0.0, dist.survival(iv.lo) - dist.survival(iv.hi));
}

Interval clip(double lo, double hi, double theta_max) {
    return {std::clamp(lo, 0.0, theta_max), std::clamp(hi, 0.0, theta_max)};
}

}  // namespace

std::string to_string(Region r) {
    switch (r) {
        case Region::Sigma1: return "S1";
        case Region::Sigma2: return "S2";
        case Region::Sigma3: return "S3";
        case Region::Bertrand1: return "B1";
        case Region::Bertrand2: return "B2";
    }
    return "?";
}

double expected_user_payoff(const OperatorProfile& op, const PricingStrategy& s, double theta,
                            const RolloverProfile& rp) {
    return op.rho * rp.expected_usage * theta - s.overage * overage_loss(rp) - s.subscription;
}

double threshold_type(const OperatorProfile& op, const PricingStrategy& s, const RolloverProfile& rp) {
    const double a = op.rho * rp.expected_usage;
    if (!(a > 0.0)) throw MarketError("threshold_type needs rho * V > 0");
    return (s.overage * overage_loss(rp) + s.subscription) / a;
}

double max_overage_fee(double sigma, const RolloverProfile& rp, double rho) {
    const double loss = overage_loss(rp);
    if (!(loss > 0.0)) return std::numeric_limits<double>::infinity();
    return rho * rp.expected_usage * sigma / loss;
}

PricingStrategy prices_for_threshold(double sigma, double overage_fee, const RolloverProfile& rp, double rho) {
    if (overage_fee < 0.0) throw MarketError("overage fee must be non-negative");
    const double sub = rho * rp.expected_usage * sigma - overage_fee * overage_loss(rp);
    if (sub < 0.0) {
        std::ostringstream os;
        os << "overage fee " << overage_fee << " too large for threshold " << sigma
           << " (subscription fee would be " << sub << ")";
        throw MarketError(os.str());
    }
    return {sub, overage_fee};
}

double xi(const OperatorProfile& op1, const OperatorProfile& op2, const RolloverProfile& rp1,
          const RolloverProfile& rp2) {
    const double a1 = op1.rho * rp1.expected_usage;
    if (!(a1 > 0.0)) throw MarketError("xi needs rho1 * V1 > 0");
    return op2.rho * rp2.expected_usage / a1;
}

double neutral_type(double sigma1, double sigma2, double xi) {
    if (std::fabs(1.0 - xi) <= kBertrandTol) throw MarketError("neutral_type undefined at xi = 1 (Bertrand case)");
    return (sigma1 - xi * sigma2) / (1.0 - xi);
}

MarketPartition partition(double sigma1, double sigma2, double xi, double theta_max) {
    if (sigma1 < 0.0 || sigma2 < 0.0) throw MarketError("partition: thresholds must be non-negative");
    if (xi > 1.0 + kBertrandTol) throw MarketError("partition: relabel operators so that xi <= 1");
    MarketPartition p;
    p.sigma1 = sigma1;
    p.sigma2 = sigma2;
    if (std::fabs(1.0 - xi) <= kBertrandTol) {
        if (sigma1 <= sigma2) {
            p.region = Region::Bertrand1;
            p.share1 = clip(sigma1, theta_max, theta_max);
        } else {
            p.region = Region::Bertrand2;
            p.share2 = clip(sigma2, theta_max, theta_max);
        }
        return p;
    }
    if (sigma1 - sigma2 <= 0.0) {
        p.region = Region::Sigma2;
        p.share1 = clip(sigma1, theta_max, theta_max);
    } else if (sigma1 - sigma2 >= (1.0 - xi) * (theta_max - sigma2)) {
        p.region = Region::Sigma1;
        p.share2 = clip(sigma2, theta_max, theta_max);
    } else {
        p.region = Region::Sigma3;
        const double t = std::clamp(neutral_type(sigma1, sigma2, xi), 0.0, theta_max);
        p.neutral = t;
        p.share1 = clip(t, theta_max, theta_max);
        p.share2 = clip(sigma2, t, theta_max);
    }
    return p;
}

std::pair<double, double> operator_profits(const MarketPartition& part, double a1, double psi1, double a2,
                                           double psi2, const ValuationDistribution& dist) {
    const double w1 = part.share1.empty() ? 0.0 : a1 * (part.sigma1 - psi1) * mass(part.share1, dist);
    const double w2 = part.share2.empty() ? 0.0 : a2 * (part.sigma2 - psi2) * mass(part.share2, dist);
    return {w1, w2};
}

std::pair<double, double> operator_profits(const MarketPartition& part, const OperatorProfile& op1,
                                           const OperatorProfile& op2, const RolloverProfile& rp1,
                                           const RolloverProfile& rp2, const ValuationDistribution& dist) {
    return operator_profits(part, op1.rho * rp1.expected_usage, op1.psi(), op2.rho * rp2.expected_usage,
                            op2.psi(), dist);
}

std::pair<double, double> operator_profits_integral(const MarketPartition& part, const OperatorProfile& op1,
                                                    const PricingStrategy& s1, const RolloverProfile& rp1,
                                                    const OperatorProfile& op2, const PricingStrategy& s2,
                                                    const RolloverProfile& rp2,
                                                    const ValuationDistribution& dist) {
    using boost::math::quadrature::gauss_kronrod;
    auto one = [&](const Interval& iv, const OperatorProfile& op, const PricingStrategy& s,
                   const RolloverProfile& rp) {
        if (iv.empty()) return 0.0;
        const double revenue_per_user = s.overage * overage_loss(rp) + s.subscription;
        const double cost_per_user = rp.expected_usage * op.cost;
        auto integrand = [&](double t) { return (revenue_per_user - cost_per_user) * dist.pdf(t); };
        return gauss_kronrod<double, 61>::integrate(integrand, iv.lo, iv.hi, 15, 1e-13);
    };
    return {one(part.share1, op1, s1, rp1), one(part.share2, op2, s2, rp2)};
}

}  // namespace rollduo
