#include "rollduo/mechanism_game.hpp"

#include "rollduo/numerics.hpp"
#include "rollduo/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <limits>
#include <sstream>

namespace rollduo {

namespace {

constexpr Mechanism kBoth[2] = {Mechanism::T, Mechanism::R};

int idx(Mechanism k) { return k == Mechanism::T ? 0 : 1; }
Mechanism other(Mechanism k) { return k == Mechanism::T ? Mechanism::R : Mechanism::T; }

bool mno1_shut_out(const PricingEquilibrium& eq) {
    return eq.regime == Regime::Mono2Strong || eq.regime == Regime::Mono2Weak;
}
bool mno2_shut_out(const PricingEquilibrium& eq) {
    return eq.regime == Regime::Mono1Strong || eq.regime == Regime::Mono1Weak;
}

// Failure-rate gap with the argument kept inside the support where the
// density is positive.
double safe_gap(double x, const ValuationDistribution& dist) {
    return dist.gap(std::max(x, 1e-12 * dist.theta_max()));
}

bool near_equal(double a, double b, double tol) { return std::fabs(a - b) <= tol * std::max(1.0, std::max(std::fabs(a), std::fabs(b))); }

MechanismCell solve_cell(const OperatorProfile& op1, const UsagePair& u1, const OperatorProfile& op2,
                         const UsagePair& u2, Mechanism k1, Mechanism k2, const ValuationDistribution& dist,
                         const PricingOptions& opt) {
    MechanismCell c;
    c.eq = solve_pricing(op1.rho * u1.of(k1), op1.psi(), op2.rho * u2.of(k2), op2.psi(), dist, opt);
    c.W1 = c.eq.W1;
    c.W2 = c.eq.W2;
    return c;
}

MechanismMatrix mirrored(const MechanismMatrix& m) {
    MechanismMatrix out;
    for (Mechanism a : kBoth)
        for (Mechanism b : kBoth) {
            const auto& src = m.at(b, a);
            auto& dst = out.at(a, b);
            dst.W1 = src.W2;
            dst.W2 = src.W1;
            dst.eq = mirrored(src.eq);
        }
    return out;
}

MarketMode mirrored(MarketMode m) {
    if (m == MarketMode::Mno1Surviving) return MarketMode::Mno2Surviving;
    if (m == MarketMode::Mno2Surviving) return MarketMode::Mno1Surviving;
    return m;
}

std::string mirrored_label(const std::string& label) {
    if (label == "RNa") return "NaR";
    if (label == "NaR") return "RNa";
    std::string out;
    std::size_t start = 0;
    while (start <= label.size()) {
        const std::size_t plus = label.find('+', start);
        std::string part = label.substr(start, plus == std::string::npos ? std::string::npos : plus - start);
        if (part.size() == 2) std::swap(part[0], part[1]);
        if (!out.empty()) out += '+';
        out += part;
        if (plus == std::string::npos) break;
        start = plus + 1;
    }
    return out;
}

std::string label_of(const std::vector<MechanismPair>& eqs) {
    if (eqs.empty()) return "none";
    // fixed display order
    const MechanismPair order[4] = {{Mechanism::R, Mechanism::T},
                                    {Mechanism::R, Mechanism::R},
                                    {Mechanism::T, Mechanism::R},
                                    {Mechanism::T, Mechanism::T}};
    std::string out;
    for (const auto& p : order)
        if (std::find(eqs.begin(), eqs.end(), p) != eqs.end()) {
            if (!out.empty()) out += '+';
            out += to_string(p);
        }
    return out;
}

struct ScanPoint {
    double c = 0.0;
    bool coexist = false;
    double f = 0.0;
};

// Scan own cost on [0, rho theta_max] and locate sign changes of the profit
// difference between R and T, restricted to the coexistence mode.
RollThreshold roll_threshold(const std::function<double(double)>& diff,
                             const std::function<bool(double)>& coexist, double hi_cost, int grid) {
    if (grid < 2) throw MarketError("c_roll: grid needs at least 2 points");
    std::vector<ScanPoint> pts(static_cast<std::size_t>(grid));
    RollThreshold r;
    r.lo = std::numeric_limits<double>::quiet_NaN();
    r.hi = std::numeric_limits<double>::quiet_NaN();
    for (int i = 0; i < grid; ++i) {
        auto& p = pts[static_cast<std::size_t>(i)];
        p.c = hi_cost * i / (grid - 1);
        p.coexist = coexist(p.c);
        if (p.coexist) {
            p.f = diff(p.c);
            if (std::isnan(r.lo)) r.lo = p.c;
            r.hi = p.c;
        }
    }
    if (std::isnan(r.lo)) {
        r.binding = false;
        r.value = std::numeric_limits<double>::quiet_NaN();
        return r;
    }
    std::vector<double> roots;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const auto& a = pts[i];
        const auto& b = pts[i + 1];
        if (!a.coexist || !b.coexist) continue;
        if (a.f == 0.0) {
            roots.push_back(a.c);
        } else if ((a.f > 0.0) != (b.f > 0.0) && b.f != 0.0) {
            roots.push_back(bracketed_root({diff, a.c, b.c}, 1e-9 * std::max(1.0, hi_cost)));
        }
    }
    if (pts.back().coexist && pts.back().f == 0.0) roots.push_back(pts.back().c);
    r.crossings = static_cast<int>(roots.size());
    if (roots.empty()) {
        r.binding = false;
        // rollover preferred everywhere: the threshold sits at the top of the range
        double any = 0.0;
        for (const auto& p : pts)
            if (p.coexist) {
                any = p.f;
                break;
            }
        r.value = any > 0.0 ? r.hi : r.lo;
        return r;
    }
    r.multiple = roots.size() > 1;
    r.value = *std::max_element(roots.begin(), roots.end());
    return r;
}

bool has_tr(const MechanismEquilibrium& me) {
    const MechanismPair tr{Mechanism::T, Mechanism::R};
    return std::find(me.equilibria.begin(), me.equilibria.end(), tr) != me.equilibria.end();
}

}  // namespace

UsagePair make_usage_pair(const DemandModel& demand, int Q, double beta) {
    return {expected_usage(demand, Q, beta, Mechanism::T), expected_usage(demand, Q, beta, Mechanism::R)};
}

std::string to_string(const MechanismPair& m) { return {to_char(m.first), to_char(m.second)}; }

std::string to_string(MarketMode m) {
    switch (m) {
        case MarketMode::Mno1Surviving: return "mno1";
        case MarketMode::Mno2Surviving: return "mno2";
        case MarketMode::Coexistence: return "coexist";
    }
    return "?";
}

const MechanismCell& MechanismMatrix::at(Mechanism k1, Mechanism k2) const { return cells[idx(k1)][idx(k2)]; }
MechanismCell& MechanismMatrix::at(Mechanism k1, Mechanism k2) { return cells[idx(k1)][idx(k2)]; }

double MechanismMatrix::max_profit() const {
    double m = 0.0;
    for (const auto& row : cells)
        for (const auto& c : row) m = std::max({m, c.W1, c.W2});
    return m;
}

MechanismMatrix payoff_matrix(const OperatorProfile& op1, const UsagePair& u1, const OperatorProfile& op2,
                              const UsagePair& u2, const ValuationDistribution& dist, const MatrixOptions& opt) {
    if (!(op1.psi() < dist.theta_max()) || !(op2.psi() < dist.theta_max()))
        throw MarketError("payoff_matrix: each cost-QoS ratio must lie below theta_max");
    MechanismMatrix m;
    if (opt.concurrent_cells) {
        std::future<MechanismCell> fut[2][2];
        for (Mechanism a : kBoth)
            for (Mechanism b : kBoth)
                fut[idx(a)][idx(b)] = std::async(std::launch::async, solve_cell, std::cref(op1), std::cref(u1),
                                                 std::cref(op2), std::cref(u2), a, b, std::cref(dist),
                                                 std::cref(opt.pricing));
        for (Mechanism a : kBoth)
            for (Mechanism b : kBoth) m.at(a, b) = fut[idx(a)][idx(b)].get();
    } else {
        for (Mechanism a : kBoth)
            for (Mechanism b : kBoth) m.at(a, b) = solve_cell(op1, u1, op2, u2, a, b, dist, opt.pricing);
    }
    return m;
}

MechanismMatrix payoff_matrix(const OperatorProfile& op1, const OperatorProfile& op2, const DemandModel& demand,
                              double beta, const ValuationDistribution& dist, const MatrixOptions& opt) {
    return payoff_matrix(op1, make_usage_pair(demand, op1.cap, beta), op2, make_usage_pair(demand, op2.cap, beta),
                         dist, opt);
}

MechanismEquilibrium nash_pure(const MechanismMatrix& matrix, std::optional<double> eps) {
    const double e = eps.value_or(1e-9 * matrix.max_profit());
    if (!(e >= 0.0)) throw MarketError("nash_pure: eps must be non-negative");
    MechanismEquilibrium out;
    out.matrix = matrix;
    for (Mechanism a : kBoth)
        for (Mechanism b : kBoth) {
            const auto& c = matrix.at(a, b);
            const bool stay1 = c.W1 >= matrix.at(other(a), b).W1 - e;
            const bool stay2 = c.W2 >= matrix.at(a, other(b)).W2 - e;
            if (stay1 && stay2) out.equilibria.emplace_back(a, b);
        }
    out.label = label_of(out.equilibria);

    const auto& rt = matrix.at(Mechanism::R, Mechanism::T);
    const auto& rr = matrix.at(Mechanism::R, Mechanism::R);
    const auto& tr = matrix.at(Mechanism::T, Mechanism::R);
    if (out.label == "RT+RR" && mno2_shut_out(rt.eq) && mno2_shut_out(rr.eq)) {
        if (near_equal(rt.W1, rr.W1, 1e-9)) {
            out.label = "RNa";
        } else {
            out.diagnostics.push_back("MNO-2 shut out under both choices but W1 differs");
        }
    } else if (out.label == "RR+TR" && mno1_shut_out(tr.eq) && mno1_shut_out(rr.eq)) {
        out.label = "NaR";
    }
    if (out.equilibria.empty()) out.diagnostics.push_back("no pure-strategy equilibrium");

    bool all1 = !out.equilibria.empty(), all2 = !out.equilibria.empty();
    for (const auto& p : out.equilibria) {
        all1 = all1 && mno1_shut_out(matrix.at(p.first, p.second).eq);
        all2 = all2 && mno2_shut_out(matrix.at(p.first, p.second).eq);
    }
    out.nash_mode = all2 ? MarketMode::Mno1Surviving : all1 ? MarketMode::Mno2Surviving : MarketMode::Coexistence;
    out.mode = out.nash_mode;
    for (const auto& row : matrix.cells)
        for (const auto& c : row)
            if (!c.eq.consistent) out.diagnostics.push_back(c.eq.diagnostic);
    out.consistent = out.diagnostics.empty();
    return out;
}

double c_single_1(double rho1, double rho2, double c2, double VT, double VR, const ValuationDistribution& dist) {
    const double psi2 = c2 / rho2;
    const double g = psi2 >= dist.theta_max() ? 0.0 : safe_gap(psi2, dist);
    return rho1 * (psi2 - (1.0 - rho2 * VT / (rho1 * VR)) * g);
}

double c_single_2(double rho1, double rho2, double c1, double VT, double VR, const ValuationDistribution& dist) {
    const double tm = dist.theta_max();
    const double ninf = -std::numeric_limits<double>::infinity();
    const double psi1 = c1 / rho1;
    const double b1 =
        psi1 >= 0.0 && psi1 < tm ? rho2 * (psi1 - (1.0 - rho1 * VT / (rho2 * VR)) * safe_gap(psi1, dist)) : ninf;
    const double x = (c1 - (rho1 - rho2) * tm) / rho2;
    const double b2 = x >= 0.0 && x < tm ? c1 - (rho1 - rho2) * tm - rho2 * safe_gap(x, dist) : ninf;
    return std::max(b1, b2);
}

MarketMode single_survivor_mode(double rho1, double c1, double rho2, double c2, const UsagePair& u1,
                                const UsagePair& u2, const ValuationDistribution& dist) {
    if (c1 < c_single_1(rho1, rho2, c2, u2.VT, u1.VR, dist)) return MarketMode::Mno1Surviving;
    if (c2 < c_single_2(rho1, rho2, c1, u1.VT, u2.VR, dist)) return MarketMode::Mno2Surviving;
    return MarketMode::Coexistence;
}

bool qos_flip(double rho1, double rho2, double VT, double VR) { return rho2 > rho1 * VT / VR; }

RollThreshold c_roll_1(double rho1, double rho2, double c2, const UsagePair& u1, const UsagePair& u2,
                       const ValuationDistribution& dist, int grid, const PricingOptions& opt) {
    const double a2 = rho2 * u2.VR, psi2 = c2 / rho2;
    auto diff = [&](double c1) {
        const double psi1 = c1 / rho1;
        const double wr = solve_pricing(rho1 * u1.VR, psi1, a2, psi2, dist, opt).W1;
        const double wt = solve_pricing(rho1 * u1.VT, psi1, a2, psi2, dist, opt).W1;
        return wr - wt;
    };
    auto coexist = [&](double c1) {
        return single_survivor_mode(rho1, c1, rho2, c2, u1, u2, dist) == MarketMode::Coexistence;
    };
    // stay strictly inside the support so every cell is well posed
    return roll_threshold(diff, coexist, rho1 * dist.theta_max() * (1.0 - 1e-9), grid);
}

RollThreshold c_roll_2(double rho1, double rho2, double c1, const UsagePair& u1, const UsagePair& u2,
                       const ValuationDistribution& dist, int grid, const PricingOptions& opt) {
    const double a1 = rho1 * u1.VR, psi1 = c1 / rho1;
    auto diff = [&](double c2) {
        const double psi2 = c2 / rho2;
        const double wr = solve_pricing(a1, psi1, rho2 * u2.VR, psi2, dist, opt).W2;
        const double wt = solve_pricing(a1, psi1, rho2 * u2.VT, psi2, dist, opt).W2;
        return wr - wt;
    };
    auto coexist = [&](double c2) {
        return single_survivor_mode(rho1, c1, rho2, c2, u1, u2, dist) == MarketMode::Coexistence;
    };
    return roll_threshold(diff, coexist, rho2 * dist.theta_max() * (1.0 - 1e-9), grid);
}

MechanismEquilibrium classify_mechanism_equilibrium(const OperatorProfile& op1, const UsagePair& u1,
                                                    const OperatorProfile& op2, const UsagePair& u2,
                                                    const ValuationDistribution& dist,
                                                    const ClassifyOptions& opt) {
    if (op1.rho < op2.rho) {
        MechanismEquilibrium me = classify_mechanism_equilibrium(op2, u2, op1, u1, dist, opt);
        me.matrix = mirrored(me.matrix);
        for (auto& p : me.equilibria) std::swap(p.first, p.second);
        me.label = mirrored_label(me.label);
        me.mode = mirrored(me.mode);
        me.nash_mode = mirrored(me.nash_mode);
        me.swapped = true;
        return me;
    }
    const MechanismMatrix m = payoff_matrix(op1, u1, op2, u2, dist, opt.matrix);
    MechanismEquilibrium me = nash_pure(m, opt.eps);
    me.mode = single_survivor_mode(op1.rho, op1.cost, op2.rho, op2.cost, u1, u2, dist);
    me.qos_flip = qos_flip(op1.rho, op2.rho, u1.VT, u2.VR);

    const auto& rt = m.at(Mechanism::R, Mechanism::T);
    const auto& rr = m.at(Mechanism::R, Mechanism::R);
    const auto& tr = m.at(Mechanism::T, Mechanism::R);
    const auto& tt = m.at(Mechanism::T, Mechanism::T);
    const double e = opt.eps.value_or(1e-9 * m.max_profit());
    if (me.mode != me.nash_mode) {
        me.diagnostics.push_back("cost-threshold mode " + to_string(me.mode) + " differs from equilibrium mode " +
                                 to_string(me.nash_mode));
    }
    if (me.mode == MarketMode::Mno1Surviving && !near_equal(rt.W1, rr.W1, 1e-9)) {
        std::ostringstream os;
        os << "MNO-1 surviving but W1(R,T)=" << rt.W1 << " != W1(R,R)=" << rr.W1;
        me.diagnostics.push_back(os.str());
    }
    if (me.mode == MarketMode::Mno2Surviving && rr.W2 > tr.W2 + e) {
        std::ostringstream os;
        os << "MNO-2 surviving but W2(R,R)=" << rr.W2 << " > W2(T,R)=" << tr.W2;
        me.diagnostics.push_back(os.str());
    }
    if (me.mode == MarketMode::Coexistence && !(rt.W1 > tt.W1)) {
        me.diagnostics.push_back("coexistence but W1(R,T) does not exceed W1(T,T)");
    }
    me.consistent = me.diagnostics.empty();
    return me;
}

MechanismEquilibrium classify_mechanism_equilibrium(const OperatorProfile& op1, const OperatorProfile& op2,
                                                    const DemandModel& demand, double beta,
                                                    const ValuationDistribution& dist,
                                                    const ClassifyOptions& opt) {
    return classify_mechanism_equilibrium(op1, make_usage_pair(demand, op1.cap, beta), op2,
                                          make_usage_pair(demand, op2.cap, beta), dist, opt);
}

bool tr_region_empty(double rho1, double rho2, const UsagePair& u1, const UsagePair& u2,
                     const ValuationDistribution& dist, int cost_grid, int jobs) {
    if (cost_grid < 2) throw MarketError("tr_region_empty: cost_grid needs at least 2 points");
    const double tm = dist.theta_max() * (1.0 - 1e-9);
    const auto n = static_cast<std::size_t>(cost_grid);
    std::atomic<bool> found{false};
    ClassifyOptions copt;
    copt.matrix.concurrent_cells = false;
    parallel_for(n * n, jobs, [&](std::size_t k) {
        if (found.load()) return;
        const double c1 = rho1 * tm * static_cast<double>(k / n) / (cost_grid - 1);
        const double c2 = rho2 * tm * static_cast<double>(k % n) / (cost_grid - 1);
        if (single_survivor_mode(rho1, c1, rho2, c2, u1, u2, dist) != MarketMode::Coexistence) return;
        OperatorProfile op1{rho1, c1, 1, Mechanism::T}, op2{rho2, c2, 1, Mechanism::T};
        const auto me = classify_mechanism_equilibrium(op1, u1, op2, u2, dist, copt);
        if (me.nash_mode == MarketMode::Coexistence && has_tr(me)) found.store(true);
    });
    return !found.load();
}

QosThresholds qos_regime_thresholds(double rho1, double c1, const UsagePair& u1, const UsagePair& u2,
                                    const ValuationDistribution& dist, int cost_grid, int jobs) {
    QosThresholds q;
    const double lo = 0.05 * rho1;
    const double rtol = 1e-4 * rho1;
    std::ostringstream diag;

    // rho_hat: empty (T,R) region below, non-empty above
    const bool empty_lo = tr_region_empty(rho1, lo, u1, u2, dist, cost_grid, jobs);
    const bool empty_hi = tr_region_empty(rho1, rho1, u1, u2, dist, cost_grid, jobs);
    if (!empty_lo) {
        q.rho_hat = lo;
        q.rho_hat_bracketed = false;
        diag << "(T,R) region already present at rho2=" << lo << "; ";
    } else if (empty_hi) {
        q.rho_hat = rho1;
        q.rho_hat_bracketed = false;
        diag << "(T,R) region empty up to rho2=rho1; ";
    } else {
        double a = lo, b = rho1;
        while (b - a > rtol) {
            const double mid = 0.5 * (a + b);
            (tr_region_empty(rho1, mid, u1, u2, dist, cost_grid, jobs) ? a : b) = mid;
        }
        q.rho_hat = 0.5 * (a + b);
    }

    // rho_tilde: C1roll(r, C2roll(r, c1)) - c1 changes sign
    auto g = [&](double r) {
        const auto t2 = c_roll_2(rho1, r, c1, u1, u2, dist, cost_grid);
        if (std::isnan(t2.value)) return std::numeric_limits<double>::quiet_NaN();
        const auto t1 = c_roll_1(rho1, r, t2.value, u1, u2, dist, cost_grid);
        return t1.value - c1;
    };
    constexpr int kScan = 24;
    std::vector<double> rs(kScan), gs(kScan);
    parallel_for(kScan, jobs, [&](std::size_t i) {
        rs[i] = lo + (rho1 * (1.0 - 1e-9) - lo) * static_cast<double>(i) / (kScan - 1);
        gs[i] = g(rs[i]);
    });
    int cross = -1;
    for (int i = kScan - 2; i >= 0; --i) {
        const double ga = gs[static_cast<std::size_t>(i)], gb = gs[static_cast<std::size_t>(i) + 1];
        if (std::isfinite(ga) && std::isfinite(gb) && (ga > 0.0) != (gb > 0.0)) {
            cross = i;
            break;
        }
    }
    if (cross < 0) {
        q.rho_tilde_bracketed = false;
        bool any_pos = false;
        for (double v : gs) any_pos = any_pos || (std::isfinite(v) && v > 0.0);
        q.rho_tilde = any_pos ? rho1 : lo;
        diag << "no sign change of the rollover-threshold condition on [" << lo << ", " << rho1 << "]";
    } else {
        const auto i = static_cast<std::size_t>(cross);
        double a = rs[i], b = rs[i + 1], ga = gs[i];
        // g is piecewise (grid-based thresholds), so bisect instead of assuming smoothness
        while (b - a > rtol) {
            const double mid = 0.5 * (a + b);
            const double gm = g(mid);
            if (!std::isfinite(gm)) break;
            if ((gm > 0.0) == (ga > 0.0)) {
                a = mid;
                ga = gm;
            } else {
                b = mid;
            }
        }
        q.rho_tilde = 0.5 * (a + b);
    }
    q.diagnostic = diag.str();
    return q;
}

}  // namespace rollduo
