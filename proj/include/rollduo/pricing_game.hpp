#pragma once

#include "rollduo/market.hpp"
#include "rollduo/valuation.hpp"

#include <string>

namespace rollduo {

enum class Regime { Mono1Strong, Mono1Weak, Coexistence, Mono2Weak, Mono2Strong };

std::string to_string(Regime r);
// Same outcome seen with the operator labels exchanged.
Regime mirrored(Regime r);

enum class ThresholdSide { AboutMno1, AboutMno2 };

// Winning / losing / no-influence thresholds. Side AboutMno1 holds the
// breakpoints of MNO-2's response in sigma1; AboutMno2 those of MNO-1's
// response in sigma2.
struct ResponseThresholds {
    double win = 0.0;
    double lose = 0.0;
    double none = 0.0;
    ThresholdSide side = ThresholdSide::AboutMno1;
};

struct PricingOptions {
    double undercut_step_rel = 1e-6;  // Bertrand undercut, as a fraction of theta_max
    double fixed_point_tol = 1e-13;   // relative to max(1, theta_max)
    int max_iter = 10000;
    double consistency_tol = 1e-8;    // mutual best-response check
};

struct PricingEquilibrium {
    Regime regime = Regime::Coexistence;
    double sigma1 = 0.0;
    double sigma2 = 0.0;
    MarketPartition partition;  // shares in the caller's labels
    double W1 = 0.0;
    double W2 = 0.0;
    double xi = 0.0;            // a2 / a1 in the caller's labels
    bool swapped = false;       // solved with the labels exchanged
    bool bertrand = false;
    int iterations = 0;
    bool used_fallback = false;
    bool consistent = true;
    std::string diagnostic;
};

PricingEquilibrium mirrored(PricingEquilibrium eq);

double monopoly_threshold(double psi, const ValuationDistribution& dist);
// Profit of a monopolist with strength a = rho V at threshold sigma.
double monopoly_profit(double a, double psi, double sigma, const ValuationDistribution& dist);

ResponseThresholds mno2_thresholds(double psi2, double xi, const ValuationDistribution& dist);
ResponseThresholds mno1_thresholds(double psi1, double xi, const ValuationDistribution& dist);
double br_mno2(double sigma1, double psi2, double xi, const ValuationDistribution& dist);
double br_mno1(double sigma2, double psi1, double xi, const ValuationDistribution& dist);
double bertrand_br(double sigma_other, double psi, const ValuationDistribution& dist, double undercut_step);

// a_n = rho_n V_n. Any ordering of a1, a2 is accepted: the stronger operator is
// relabeled internally and the result is reported in the caller's labels.
PricingEquilibrium solve_pricing(double a1, double psi1, double a2, double psi2, const ValuationDistribution& dist,
                                 const PricingOptions& opt = {});

PricingEquilibrium pricing_equilibrium(const OperatorProfile& op1, const OperatorProfile& op2,
                                       const RolloverProfile& rp1, const RolloverProfile& rp2,
                                       const ValuationDistribution& dist, const PricingOptions& opt = {});

}  // namespace rollduo
