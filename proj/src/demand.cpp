#include "rollduo/demand.hpp"

#include "rollduo/numerics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace rollduo {

namespace {

void check_cap(const DemandModel& demand, int Q) {
    if (Q < 1 || Q > demand.max_units()) {
        std::ostringstream os;
        os << "cap Q=" << Q << " outside [1, " << demand.max_units() << "]";
        throw DemandError(os.str());
    }
}

double lognormal_cdf(double x, double mu, double sigma) {
    if (x <= 0.0) return 0.0;
    return 0.5 * std::erfc(-(std::log(x) - mu) / (sigma * std::sqrt(2.0)));
}

double lognormal_sf(double x, double mu, double sigma) {
    if (x <= 0.0) return 1.0;
    return 0.5 * std::erfc((std::log(x) - mu) / (sigma * std::sqrt(2.0)));
}

// mass of (a, b] under the lognormal, using whichever tail keeps precision
double lognormal_mass(double a, double b, double mu, double sigma) {
    if (a > 0.0 && std::log(a) > mu) return lognormal_sf(a, mu, sigma) - lognormal_sf(b, mu, sigma);
    return lognormal_cdf(b, mu, sigma) - lognormal_cdf(a, mu, sigma);
}

std::vector<double> lognormal_bins(double mu, double sigma, int D) {
    std::vector<double> pmf(static_cast<std::size_t>(D) + 1);
    double total = 0.0;
    for (int d = 0; d <= D; ++d) {
        const double a = std::max(0.0, d - 0.5);
        const double b = std::min(static_cast<double>(D), d + 0.5);
        pmf[d] = std::max(0.0, lognormal_mass(a, b, mu, sigma));
        total += pmf[d];
    }
    if (!(total > 0.0) || !std::isfinite(total)) {
        // all mass underflowed: the density sits entirely on one side of the support
        std::fill(pmf.begin(), pmf.end(), 0.0);
        const double m = std::exp(mu);
        const int d = static_cast<int>(std::clamp(std::round(m), 0.0, static_cast<double>(D)));
        pmf[d] = 1.0;
        return pmf;
    }
    for (double& p : pmf) p /= total;
    return pmf;
}

double pmf_mean(const std::vector<double>& pmf) {
    double m = 0.0;
    for (std::size_t d = 0; d < pmf.size(); ++d) m += static_cast<double>(d) * pmf[d];
    return m;
}

// Tarjan SCC over the support graph of P, iterative to avoid deep recursion.
std::vector<int> strongly_connected(const std::vector<double>& P, int n, int& count) {
    std::vector<int> index(n, -1), low(n, 0), comp(n, -1), stack;
    std::vector<char> on_stack(n, 0);
    int next = 0;
    count = 0;
    struct Frame {
        int v;
        int j;
    };
    for (int s = 0; s < n; ++s) {
        if (index[s] >= 0) continue;
        std::vector<Frame> call{{s, 0}};
        index[s] = low[s] = next++;
        stack.push_back(s);
        on_stack[s] = 1;
        while (!call.empty()) {
            Frame& fr = call.back();
            const int v = fr.v;
            if (fr.j < n) {
                const int w = fr.j++;
                if (P[static_cast<std::size_t>(v) * n + w] <= 0.0) continue;
                if (index[w] < 0) {
                    index[w] = low[w] = next++;
                    stack.push_back(w);
                    on_stack[w] = 1;
                    call.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            if (low[v] == index[v]) {
                int w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = 0;
                    comp[w] = count;
                } while (w != v);
                ++count;
            }
            call.pop_back();
            if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
        }
    }
    return comp;
}

std::vector<double> left_multiply(const std::vector<double>& p, const std::vector<double>& P, int n) {
    std::vector<double> out(n, 0.0);
    for (int i = 0; i < n; ++i) {
        const double pi = p[i];
        if (pi == 0.0) continue;
        const double* row = &P[static_cast<std::size_t>(i) * n];
        for (int j = 0; j < n; ++j) out[j] += pi * row[j];
    }
    return out;
}

double residual_inf(const std::vector<double>& p, const std::vector<double>& P, int n) {
    const auto q = left_multiply(p, P, n);
    double r = 0.0;
    for (int j = 0; j < n; ++j) r = std::max(r, std::fabs(q[j] - p[j]));
    return r;
}

// Stationary law of the closed class `members` by a direct solve of
// pi (P_C - I) = 0 with the normalization row.
std::vector<double> class_stationary(const std::vector<double>& P, int n, const std::vector<int>& members) {
    const int m = static_cast<int>(members.size());
    std::vector<double> out(n, 0.0);
    if (m == 1) {
        out[members[0]] = 1.0;
        return out;
    }
    Eigen::MatrixXd A(m, m);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            A(b, a) = P[static_cast<std::size_t>(members[a]) * n + members[b]] - (a == b ? 1.0 : 0.0);
    A.row(m - 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    rhs(m - 1) = 1.0;
    Eigen::VectorXd x = A.fullPivLu().solve(rhs);
    double total = 0.0;
    for (int a = 0; a < m; ++a) {
        out[members[a]] = std::max(0.0, x(a));
        total += out[members[a]];
    }
    for (double& v : out) v /= total;
    return out;
}

}  // namespace

DemandModel make_demand_from_pmf(std::vector<double> pmf, double unit_mb) {
    if (pmf.size() < 2) throw DemandError("demand support must contain at least {0, 1}");
    if (!(unit_mb > 0.0)) throw DemandError("unit_mb must be positive");
    double total = 0.0;
    for (double p : pmf) {
        if (!(p >= 0.0) || !std::isfinite(p)) throw DemandError("demand pmf entries must be finite and >= 0");
        total += p;
    }
    if (!(total > 0.0)) throw DemandError("demand pmf has zero total mass");
    for (double& p : pmf) p /= total;
    DemandModel m;
    m.pmf = std::move(pmf);
    m.unit_mb = unit_mb;
    m.mean = pmf_mean(m.pmf);
    return m;
}

DemandModel make_uniform_demand(int lo_units, int hi_units, double unit_mb) {
    if (lo_units < 0 || hi_units < lo_units || hi_units < 1) throw DemandError("invalid uniform demand range");
    std::vector<double> pmf(static_cast<std::size_t>(hi_units) + 1, 0.0);
    for (int d = lo_units; d <= hi_units; ++d) pmf[d] = 1.0;
    return make_demand_from_pmf(std::move(pmf), unit_mb);
}

DemandModel make_point_mass_demand(int d_units, int max_units, double unit_mb) {
    if (d_units < 0 || d_units > max_units || max_units < 1) throw DemandError("invalid point-mass demand");
    std::vector<double> pmf(static_cast<std::size_t>(max_units) + 1, 0.0);
    pmf[d_units] = 1.0;
    return make_demand_from_pmf(std::move(pmf), unit_mb);
}

DemandModel make_truncated_lognormal_demand(double mean_units, int max_units, double sigma_log,
                                            double unit_mb) {
    if (max_units < 1) throw DemandError("max_units must be >= 1");
    if (!(mean_units > 0.0 && mean_units < max_units))
        throw DemandError("lognormal demand needs 0 < mean < max");
    if (!(sigma_log > 0.0)) throw DemandError("sigma_log must be positive");

    auto gap = [&](double mu) { return pmf_mean(lognormal_bins(mu, sigma_log, max_units)) - mean_units; };
    const double lo = std::log(mean_units) - 12.0 * sigma_log - 5.0;
    const double hi = std::log(static_cast<double>(max_units)) + 12.0 * sigma_log + 5.0;
    if (gap(lo) > 0.0 || gap(hi) < 0.0) {
        std::ostringstream os;
        os << "infeasible lognormal mean " << mean_units << " on [0, " << max_units
           << "] with sigma_log=" << sigma_log;
        throw DemandError(os.str());
    }
    const double mu = bracketed_root({gap, lo, hi}, 1e-13);
    DemandModel m = make_demand_from_pmf(lognormal_bins(mu, sigma_log, max_units), unit_mb);
    if (std::fabs(m.mean - mean_units) > 1e-3 * mean_units) {
        std::ostringstream os;
        os << "lognormal mean match failed: got " << m.mean << ", wanted " << mean_units;
        throw DemandError(os.str());
    }
    return m;
}

std::vector<double> rollover_transition(const DemandModel& demand, int Q) {
    check_cap(demand, Q);
    const int n = Q + 1;
    std::vector<double> P(static_cast<std::size_t>(n) * n, 0.0);
    for (int tau = 0; tau <= Q; ++tau) {
        double* row = &P[static_cast<std::size_t>(tau) * n];
        for (int d = 0; d <= demand.max_units(); ++d) {
            const double f = demand.pmf[d];
            if (f == 0.0) continue;
            const int next = std::max(0, Q - std::max(0, d - tau));
            row[next] += f;
        }
    }
    return P;
}

double stationary_residual(const DemandModel& demand, int Q, const std::vector<double>& p) {
    const auto P = rollover_transition(demand, Q);
    return residual_inf(p, P, Q + 1);
}

std::vector<double> rollover_stationary(const DemandModel& demand, int Q) {
    const auto P = rollover_transition(demand, Q);
    const int n = Q + 1;

    int ncomp = 0;
    const auto comp = strongly_connected(P, n, ncomp);
    std::vector<char> closed(ncomp, 1);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (P[static_cast<std::size_t>(i) * n + j] > 0.0 && comp[i] != comp[j]) closed[comp[i]] = 0;
    const int nclosed = static_cast<int>(std::count(closed.begin(), closed.end(), 1));

    if (nclosed == 1) {
        std::vector<double> p(n, 1.0 / n);
        for (int it = 0; it < 5000; ++it) {
            auto q = left_multiply(p, P, n);
            double r = 0.0;
            for (int j = 0; j < n; ++j) r = std::max(r, std::fabs(q[j] - p[j]));
            p = std::move(q);
            if (r <= 1e-12) return p;
        }
        // periodic class: power iteration oscillates, solve directly
        std::vector<int> members;
        const int c = static_cast<int>(std::find(closed.begin(), closed.end(), 1) - closed.begin());
        for (int i = 0; i < n; ++i)
            if (comp[i] == c) members.push_back(i);
        return class_stationary(P, n, members);
    }

    // Several stationary laws: take the Cesaro limit started from tau = 0, i.e.
    // weight each closed class by its absorption probability from state 0.
    std::vector<double> result(n, 0.0);
    if (closed[comp[0]]) {
        std::vector<int> members;
        for (int i = 0; i < n; ++i)
            if (comp[i] == comp[0]) members.push_back(i);
        return class_stationary(P, n, members);
    }
    std::vector<int> transient;
    std::vector<int> tpos(n, -1);
    for (int i = 0; i < n; ++i)
        if (!closed[comp[i]]) {
            tpos[i] = static_cast<int>(transient.size());
            transient.push_back(i);
        }
    const int t = static_cast<int>(transient.size());
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(t, t);
    for (int a = 0; a < t; ++a)
        for (int b = 0; b < t; ++b) A(a, b) -= P[static_cast<std::size_t>(transient[a]) * n + transient[b]];
    const auto lu = A.fullPivLu();
    for (int c = 0; c < ncomp; ++c) {
        if (!closed[c]) continue;
        Eigen::VectorXd rhs(t);
        for (int a = 0; a < t; ++a) {
            double s = 0.0;
            for (int j = 0; j < n; ++j)
                if (comp[j] == c) s += P[static_cast<std::size_t>(transient[a]) * n + j];
            rhs(a) = s;
        }
        const double w = lu.solve(rhs)(tpos[0]);
        if (w <= 0.0) continue;
        std::vector<int> members;
        for (int i = 0; i < n; ++i)
            if (comp[i] == c) members.push_back(i);
        const auto pc = class_stationary(P, n, members);
        for (int i = 0; i < n; ++i) result[i] += w * pc[i];
    }
    const double total = std::accumulate(result.begin(), result.end(), 0.0);
    for (double& v : result) v /= total;
    return result;
}

double expected_overage(const DemandModel& demand, int Q, Mechanism kappa) {
    if (Q < 1) throw DemandError("cap Q must be >= 1");
    const int D = demand.max_units();
    if (Q >= D) return 0.0;
    // tail[k] = sum_d [d - k]^+ f(d)
    std::vector<double> tail(static_cast<std::size_t>(D) + 2, 0.0);
    double mass_above = 0.0;
    for (int k = D; k >= 0; --k) {
        tail[k] = tail[k + 1] + mass_above;
        mass_above += demand.pmf[k];
    }
    if (kappa == Mechanism::T) return tail[Q];
    const auto p = rollover_stationary(demand, Q);
    double a = 0.0;
    for (int tau = 0; tau <= Q; ++tau) a += p[tau] * tail[std::min(Q + tau, D + 1)];
    return a;
}

double expected_usage(const DemandModel& demand, int Q, double beta, Mechanism kappa) {
    if (!(beta >= 0.0 && beta <= 1.0)) throw DemandError("beta must lie in [0, 1]");
    return demand.mean - beta * expected_overage(demand, Q, kappa);
}

RolloverProfile make_rollover_profile(const DemandModel& demand, int Q, double beta, Mechanism kappa) {
    check_cap(demand, Q);
    if (!(beta >= 0.0 && beta <= 1.0)) throw DemandError("beta must lie in [0, 1]");
    RolloverProfile rp;
    rp.cap = Q;
    rp.kappa = kappa;
    rp.beta = beta;
    rp.mean_demand = demand.mean;
    if (kappa == Mechanism::T) {
        rp.rollover_dist.assign(static_cast<std::size_t>(Q) + 1, 0.0);
        rp.rollover_dist[0] = 1.0;
    } else {
        rp.rollover_dist = rollover_stationary(demand, Q);
    }
    rp.expected_overage = expected_overage(demand, Q, kappa);
    rp.expected_usage = demand.mean - beta * rp.expected_overage;
    return rp;
}

MonteCarloOverage simulate_rollover(const DemandModel& demand, int Q, std::int64_t months,
                                    std::uint64_t seed) {
    check_cap(demand, Q);
    if (months < 1000) throw DemandError("simulate_rollover needs at least 1000 months");
    std::mt19937_64 rng(seed);
    std::discrete_distribution<int> draw(demand.pmf.begin(), demand.pmf.end());
    const std::int64_t batches = 100;
    const std::int64_t per = months / batches;
    std::vector<double> batch_mean(batches, 0.0);
    std::vector<double> occupancy(static_cast<std::size_t>(Q) + 1, 0.0);
    int tau = 0;
    for (std::int64_t b = 0; b < batches; ++b) {
        double s = 0.0;
        for (std::int64_t m = 0; m < per; ++m) {
            occupancy[tau] += 1.0;
            const int d = draw(rng);
            s += std::max(0, d - Q - tau);
            tau = std::max(0, Q - std::max(0, d - tau));
        }
        batch_mean[b] = s / static_cast<double>(per);
    }
    MonteCarloOverage out;
    const double total = static_cast<double>(per * batches);
    for (double& o : occupancy) o /= total;
    out.occupancy = std::move(occupancy);
    double mean = std::accumulate(batch_mean.begin(), batch_mean.end(), 0.0) / batches;
    double var = 0.0;
    for (double v : batch_mean) var += (v - mean) * (v - mean);
    var /= (batches - 1);
    out.mean_overage = mean;
    out.std_error = std::sqrt(var / batches);
    return out;
}

}  // namespace rollduo
