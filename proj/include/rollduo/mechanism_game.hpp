#pragma once

#include "rollduo/demand.hpp"
#include "rollduo/market.hpp"
#include "rollduo/pricing_game.hpp"
#include "rollduo/valuation.hpp"

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace rollduo {

// Expected usage of one operator's plan under each mechanism.
struct UsagePair {
    double VT = 0.0;
    double VR = 0.0;

    double of(Mechanism k) const { return k == Mechanism::T ? VT : VR; }
};

UsagePair make_usage_pair(const DemandModel& demand, int Q, double beta);

using MechanismPair = std::pair<Mechanism, Mechanism>;

std::string to_string(const MechanismPair& m);

struct MechanismCell {
    double W1 = 0.0;
    double W2 = 0.0;
    PricingEquilibrium eq;
};

// cells[k1][k2], index 0 = T, 1 = R.
struct MechanismMatrix {
    std::array<std::array<MechanismCell, 2>, 2> cells;

    const MechanismCell& at(Mechanism k1, Mechanism k2) const;
    MechanismCell& at(Mechanism k1, Mechanism k2);
    double max_profit() const;
};

struct MatrixOptions {
    PricingOptions pricing;
    bool concurrent_cells = true;
};

MechanismMatrix payoff_matrix(const OperatorProfile& op1, const UsagePair& u1, const OperatorProfile& op2,
                              const UsagePair& u2, const ValuationDistribution& dist, const MatrixOptions& opt = {});
MechanismMatrix payoff_matrix(const OperatorProfile& op1, const OperatorProfile& op2, const DemandModel& demand,
                              double beta, const ValuationDistribution& dist, const MatrixOptions& opt = {});

enum class MarketMode { Mno1Surviving, Mno2Surviving, Coexistence };

std::string to_string(MarketMode m);

struct MechanismEquilibrium {
    std::vector<MechanismPair> equilibria;
    // RT, RR, TR, TT, RT+TR, RNa, NaR; "none" when no pure equilibrium exists
    std::string label;
    bool qos_flip = false;
    MarketMode mode = MarketMode::Coexistence;      // from the single-survivor cost thresholds
    MarketMode nash_mode = MarketMode::Coexistence;  // from the equilibrium cells
    bool consistent = true;
    std::vector<std::string> diagnostics;
    MechanismMatrix matrix;
    bool swapped = false;  // operators were relabeled so that rho1 >= rho2
};

// eps defaults to 1e-9 times the largest cell profit.
MechanismEquilibrium nash_pure(const MechanismMatrix& matrix, std::optional<double> eps = std::nullopt);

double c_single_1(double rho1, double rho2, double c2, double VT, double VR, const ValuationDistribution& dist);
double c_single_2(double rho1, double rho2, double c1, double VT, double VR, const ValuationDistribution& dist);

// Market mode from the two single-survivor cost thresholds.
MarketMode single_survivor_mode(double rho1, double c1, double rho2, double c2, const UsagePair& u1,
                                const UsagePair& u2, const ValuationDistribution& dist);

bool qos_flip(double rho1, double rho2, double VT, double VR);

struct RollThreshold {
    double value = 0.0;
    bool binding = true;    // false: no crossing, value is the range end
    bool multiple = false;  // several crossings; the largest is reported
    int crossings = 0;
    double lo = 0.0;        // coexistence range scanned
    double hi = 0.0;
};

// Own-cost level at which the operator becomes indifferent between T and R
// (MNO-1 against MNO-2 on R; MNO-2 against MNO-1 on R). Below it rollover is preferred.
RollThreshold c_roll_1(double rho1, double rho2, double c2, const UsagePair& u1, const UsagePair& u2,
                       const ValuationDistribution& dist, int grid = 64, const PricingOptions& opt = {});
RollThreshold c_roll_2(double rho1, double rho2, double c1, const UsagePair& u1, const UsagePair& u2,
                       const ValuationDistribution& dist, int grid = 64, const PricingOptions& opt = {});

struct ClassifyOptions {
    MatrixOptions matrix;
    std::optional<double> eps;
};

MechanismEquilibrium classify_mechanism_equilibrium(const OperatorProfile& op1, const UsagePair& u1,
                                                    const OperatorProfile& op2, const UsagePair& u2,
                                                    const ValuationDistribution& dist,
                                                    const ClassifyOptions& opt = {});
MechanismEquilibrium classify_mechanism_equilibrium(const OperatorProfile& op1, const OperatorProfile& op2,
                                                    const DemandModel& demand, double beta,
                                                    const ValuationDistribution& dist,
                                                    const ClassifyOptions& opt = {});

struct QosThresholds {
    double rho_hat = 0.0;
    double rho_tilde = 0.0;
    bool rho_hat_bracketed = true;
    bool rho_tilde_bracketed = true;
    std::string diagnostic;
};

// rho_tilde solves C1roll(rho1, r, C2roll(rho1, r, c1)) = c1 in r. rho_hat is the
// largest rho2 whose (T,R) coexistence region is empty on a cost_grid x cost_grid
// grid over [0, rho1 theta_max] x [0, rho2 theta_max].
QosThresholds qos_regime_thresholds(double rho1, double c1, const UsagePair& u1, const UsagePair& u2,
                                    const ValuationDistribution& dist, int cost_grid = 64, int jobs = 0);

bool tr_region_empty(double rho1, double rho2, const UsagePair& u1, const UsagePair& u2,
                     const ValuationDistribution& dist, int cost_grid, int jobs = 0);

}  // namespace rollduo
