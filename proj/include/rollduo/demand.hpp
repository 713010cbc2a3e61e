#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace rollduo {

enum class Mechanism { T, R };

inline char to_char(Mechanism k) { return k == Mechanism::T ? 'T' : 'R'; }

struct DemandError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Monthly demand pmf over data units {0, ..., D}.
struct DemandModel {
    std::vector<double> pmf;
    double unit_mb = 10.0;
    double mean = 0.0;

    int max_units() const { return static_cast<int>(pmf.size()) - 1; }
};

// Normalizes the table, computes the mean and checks the invariants.
DemandModel make_demand_from_pmf(std::vector<double> pmf, double unit_mb);
DemandModel make_uniform_demand(int lo_units, int hi_units, double unit_mb);
DemandModel make_point_mass_demand(int d_units, int max_units, double unit_mb);

// Lognormal density truncated to [0, max_units], integrated over unit bins
// [d - 1/2, d + 1/2), with the location parameter tuned so the discrete mean
// hits mean_units within 0.1%.
DemandModel make_truncated_lognormal_demand(double mean_units, int max_units, double sigma_log,
                                            double unit_mb);

// Transition matrix (row-stochastic, (Q+1)x(Q+1), row-major) of the balance
// chain tau' = [Q - [d - tau]^+]^+.
std::vector<double> rollover_transition(const DemandModel& demand, int Q);

std::vector<double> rollover_stationary(const DemandModel& demand, int Q);

// max_j |(pP)_j - p_j|
double stationary_residual(const DemandModel& demand, int Q, const std::vector<double>& p);

double expected_overage(const DemandModel& demand, int Q, Mechanism kappa);
double expected_usage(const DemandModel& demand, int Q, double beta, Mechanism kappa);

struct RolloverProfile {
    int cap = 0;
    Mechanism kappa = Mechanism::T;
    std::vector<double> rollover_dist;
    double expected_overage = 0.0;
    double expected_usage = 0.0;
    double beta = 1.0;
    double mean_demand = 0.0;
};

RolloverProfile make_rollover_profile(const DemandModel& demand, int Q, double beta, Mechanism kappa);

struct MonteCarloOverage {
    double mean_overage = 0.0;
    double std_error = 0.0;
    std::vector<double> occupancy;  // empirical frequency of each balance state
};

// Simulates the rollover chain from tau = 0 (batch-means standard error).
MonteCarloOverage simulate_rollover(const DemandModel& demand, int Q, std::int64_t months,
                                    std::uint64_t seed);

}  // namespace rollduo
