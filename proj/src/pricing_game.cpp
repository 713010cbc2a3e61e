#include "rollduo/pricing_game.hpp"

#include "rollduo/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rollduo {

namespace {

double solve_tol(const ValuationDistribution& dist) { return 1e-14 * std::max(1.0, dist.theta_max()); }

void require_ifr(const ValuationDistribution& dist) {
    if (!dist.is_ifr()) throw IfrViolation("valuation distribution fails the IFR check; threshold roots may not be unique");
}

void require_xi(double xi) {
    if (!(xi > 0.0 && xi < 1.0)) {
        std::ostringstream os;
        os << "xi must lie in (0, 1) here, got " << xi;
        throw MarketError(os.str());
    }
}

// Smallest valuation used as a root-bracket end; the density of some families
// vanishes at 0, which would make the failure-rate gap infinite there.
double floor_theta(const ValuationDistribution& dist) { return 1e-12 * dist.theta_max(); }

PricingEquilibrium bertrand(double a, double psi1, double psi2, const ValuationDistribution& dist,
                            const PricingOptions& opt) {
    const double step = opt.undercut_step_rel * dist.theta_max();
    PricingEquilibrium eq;
    eq.bertrand = true;
    eq.xi = 1.0;
    if (psi1 <= psi2) {
        eq.sigma2 = psi2;
        eq.sigma1 = psi1 == psi2 ? psi1 : bertrand_br(psi2, psi1, dist, step);
        eq.regime = eq.sigma1 == monopoly_threshold(psi1, dist) ? Regime::Mono1Strong : Regime::Mono1Weak;
    } else {
        eq.sigma1 = psi1;
        eq.sigma2 = bertrand_br(psi1, psi2, dist, step);
        eq.regime = eq.sigma2 == monopoly_threshold(psi2, dist) ? Regime::Mono2Strong : Regime::Mono2Weak;
    }
    eq.partition = partition(std::max(eq.sigma1, 0.0), std::max(eq.sigma2, 0.0), 1.0, dist.theta_max());
    std::tie(eq.W1, eq.W2) = operator_profits(eq.partition, a, psi1, a, psi2, dist);
    return eq;
}

// Canonical solve: a1 > a2, so xi in (0, 1).
PricingEquilibrium canonical(double a1, double psi1, double a2, double psi2, const ValuationDistribution& dist,
                             const PricingOptions& opt) {
    const double xi = a2 / a1;
    const double tm = dist.theta_max();
    const auto t2 = mno1_thresholds(psi1, xi, dist);
    const auto t1 = mno2_thresholds(psi2, xi, dist);

    PricingEquilibrium eq;
    eq.xi = xi;
    if (psi2 > t2.none) {
        eq.regime = Regime::Mono1Strong;
        eq.sigma1 = monopoly_threshold(psi1, dist);
        eq.sigma2 = psi2;
    } else if (psi2 > t2.lose) {
        eq.regime = Regime::Mono1Weak;
        eq.sigma1 = psi2;
        eq.sigma2 = psi2;
    } else if (psi1 > t1.none) {
        eq.regime = Regime::Mono2Strong;
        eq.sigma1 = psi1;
        eq.sigma2 = monopoly_threshold(psi2, dist);
    } else if (psi1 > t1.lose) {
        eq.regime = Regime::Mono2Weak;
        eq.sigma1 = psi1;
        eq.sigma2 = (psi1 + (xi - 1.0) * tm) / xi;
    } else {
        eq.regime = Regime::Coexistence;
        auto br = [&](double s1, double s2) {
            return std::pair{br_mno1(s2, psi1, xi, dist), br_mno2(s1, psi2, xi, dist)};
        };
        const double tol = opt.fixed_point_tol * std::max(1.0, tm);
        try {
            const auto fp = fixed_point_pair(br, {monopoly_threshold(psi1, dist), monopoly_threshold(psi2, dist)},
                                             tol, opt.max_iter);
            eq.sigma1 = fp.x1;
            eq.sigma2 = fp.x2;
            eq.iterations = fp.iterations;
        } catch (const NoConvergence&) {
            // nested solve: sigma2 is a fixed point of br2(br1(.))
            eq.used_fallback = true;
            auto phi = [&](double s2) { return br_mno2(br_mno1(s2, psi1, xi, dist), psi2, xi, dist) - s2; };
            eq.sigma2 = bracketed_root({phi, std::max(psi2, 0.0), tm}, tol);
            eq.sigma1 = br_mno1(eq.sigma2, psi1, xi, dist);
        }
    }

    const double ctol = opt.consistency_tol * std::max(1.0, tm);
    const double d1 = std::fabs(br_mno1(std::clamp(eq.sigma2, 0.0, tm), psi1, xi, dist) - eq.sigma1);
    const double d2 = std::fabs(br_mno2(std::max(eq.sigma1, 0.0), psi2, xi, dist) - eq.sigma2);
    // a give-up response is any threshold at or above cost; only the served side must match
    const bool out1 = psi1 >= tm, out2 = psi2 >= tm;
    if ((!out1 && d1 > ctol) || (!out2 && d2 > ctol)) {
        eq.consistent = false;
        std::ostringstream os;
        os << "best-response mismatch in regime " << to_string(eq.regime) << ": |br1-s1|=" << d1
           << " |br2-s2|=" << d2;
        eq.diagnostic = os.str();
    }
    eq.partition = partition(std::max(eq.sigma1, 0.0), std::max(eq.sigma2, 0.0), xi, tm);
    if (eq.regime == Regime::Mono2Weak) {
        // sigma1 sits exactly on the Sigma1 boundary; rounding must not leave a sliver for MNO-1
        eq.partition.region = Region::Sigma1;
        eq.partition.share1 = {};
        eq.partition.share2 = {std::clamp(eq.sigma2, 0.0, tm), tm};
        eq.partition.neutral.reset();
    }
    std::tie(eq.W1, eq.W2) = operator_profits(eq.partition, a1, psi1, a2, psi2, dist);
    return eq;
}

}  // namespace

Regime mirrored(Regime r) {
    switch (r) {
        case Regime::Mono1Strong: return Regime::Mono2Strong;
        case Regime::Mono1Weak: return Regime::Mono2Weak;
        case Regime::Coexistence: return Regime::Coexistence;
        case Regime::Mono2Weak: return Regime::Mono1Weak;
        case Regime::Mono2Strong: return Regime::Mono1Strong;
    }
    return r;
}

PricingEquilibrium mirrored(PricingEquilibrium eq) {
    std::swap(eq.sigma1, eq.sigma2);
    std::swap(eq.W1, eq.W2);
    std::swap(eq.partition.share1, eq.partition.share2);
    std::swap(eq.partition.sigma1, eq.partition.sigma2);
    eq.regime = mirrored(eq.regime);
    if (eq.xi > 0.0) eq.xi = 1.0 / eq.xi;
    eq.swapped = !eq.swapped;
    return eq;
}

std::string to_string(Regime r) {
    switch (r) {
        case Regime::Mono1Strong: return "1SM";
        case Regime::Mono1Weak: return "1WM";
        case Regime::Coexistence: return "C";
        case Regime::Mono2Weak: return "2WM";
        case Regime::Mono2Strong: return "2SM";
    }
    return "?";
}

double monopoly_threshold(double psi, const ValuationDistribution& dist) {
    require_ifr(dist);
    const double tm = dist.theta_max();
    if (psi >= tm) return tm;
    auto g = [&](double s) { return s - dist.gap(s) - psi; };
    return clamped_increasing_root(g, std::max(psi, floor_theta(dist)), tm, solve_tol(dist));
}

double monopoly_profit(double a, double psi, double sigma, const ValuationDistribution& dist) {
    return a * (sigma - psi) * dist.survival(sigma);
}

ResponseThresholds mno2_thresholds(double psi2, double xi, const ValuationDistribution& dist) {
    require_ifr(dist);
    require_xi(xi);
    const double tm = dist.theta_max();
    ResponseThresholds t;
    t.side = ThresholdSide::AboutMno1;
    t.win = psi2;
    const double mp = monopoly_threshold(psi2, dist);
    t.none = xi * mp + (1.0 - xi) * tm;
    if (psi2 >= tm) {
        t.lose = t.none;
        return t;
    }
    // Losing threshold: the interior response just reaches the corner where
    // MNO-1's share vanishes (neutral type at theta_max). The density at the
    // top of the support enters through the neutral-type term.
    const double h_top = dist.pdf(tm);
    auto f = [&](double y) {
        return y - dist.survival(y) / (xi / (1.0 - xi) * h_top + dist.pdf(y)) - psi2;
    };
    const double y = clamped_increasing_root(f, std::max(psi2, floor_theta(dist)), tm, solve_tol(dist));
    t.lose = std::min(xi * y + (1.0 - xi) * tm, t.none);
    return t;
}

ResponseThresholds mno1_thresholds(double psi1, double xi, const ValuationDistribution& dist) {
    require_ifr(dist);
    require_xi(xi);
    const double tm = dist.theta_max();
    ResponseThresholds t;
    t.side = ThresholdSide::AboutMno2;
    t.win = (psi1 + (xi - 1.0) * tm) / xi;
    t.none = monopoly_threshold(psi1, dist);
    if (psi1 >= tm) {
        t.lose = t.none;
        return t;
    }
    auto k = [&](double s) { return s - (1.0 - xi) * dist.gap(s) - psi1; };
    t.lose = clamped_increasing_root(k, std::max(psi1, floor_theta(dist)), tm, solve_tol(dist));
    return t;
}

double br_mno2(double sigma1, double psi2, double xi, const ValuationDistribution& dist) {
    if (!(sigma1 >= 0.0)) throw MarketError("br_mno2: sigma1 must be non-negative");
    const auto t = mno2_thresholds(psi2, xi, dist);
    const double tm = dist.theta_max();
    if (sigma1 < t.win) return psi2;
    if (sigma1 < t.lose) {
        auto f = [&](double s) {
            const double nt = std::min((sigma1 - xi * s) / (1.0 - xi), tm);
            const double num = dist.survival(s) - dist.survival(nt);
            return s - num / (xi / (1.0 - xi) * dist.pdf(nt) + dist.pdf(s)) - psi2;
        };
        const double lo = std::max({psi2, (sigma1 - (1.0 - xi) * tm) / xi, floor_theta(dist)});
        return clamped_increasing_root(f, lo, sigma1, solve_tol(dist));
    }
    if (sigma1 < t.none) return (sigma1 + (xi - 1.0) * tm) / xi;
    return monopoly_threshold(psi2, dist);
}

double br_mno1(double sigma2, double psi1, double xi, const ValuationDistribution& dist) {
    if (!(sigma2 >= 0.0)) throw MarketError("br_mno1: sigma2 must be non-negative");
    const auto t = mno1_thresholds(psi1, xi, dist);
    const double tm = dist.theta_max();
    if (sigma2 < t.win) return psi1;
    if (sigma2 < t.lose) {
        auto g = [&](double s) {
            const double nt = std::clamp((s - xi * sigma2) / (1.0 - xi), floor_theta(dist), tm);
            return s - (1.0 - xi) * dist.gap(nt) - psi1;
        };
        return clamped_increasing_root(g, sigma2, sigma2 + (1.0 - xi) * (tm - sigma2), solve_tol(dist));
    }
    if (sigma2 < t.none) return sigma2;
    return t.none;
}

double bertrand_br(double sigma_other, double psi, const ValuationDistribution& dist, double undercut_step) {
    if (!(undercut_step >= 0.0)) throw MarketError("undercut step must be non-negative");
    if (sigma_other < psi) return psi;
    const double mp = monopoly_threshold(psi, dist);
    if (sigma_other < mp) return std::max(psi, sigma_other - undercut_step);
    return mp;
}

PricingEquilibrium solve_pricing(double a1, double psi1, double a2, double psi2, const ValuationDistribution& dist,
                                 const PricingOptions& opt) {
    if (!(a1 > 0.0) || !(a2 > 0.0)) throw MarketError("operator strengths rho * V must be positive");
    require_ifr(dist);
    if (std::fabs(a2 / a1 - 1.0) <= kBertrandTol) return bertrand(a1, psi1, psi2, dist, opt);
    if (a2 < a1) return canonical(a1, psi1, a2, psi2, dist, opt);

    return mirrored(canonical(a2, psi2, a1, psi1, dist, opt));
}

PricingEquilibrium pricing_equilibrium(const OperatorProfile& op1, const OperatorProfile& op2,
                                       const RolloverProfile& rp1, const RolloverProfile& rp2,
                                       const ValuationDistribution& dist, const PricingOptions& opt) {
    return solve_pricing(op1.rho * rp1.expected_usage, op1.psi(), op2.rho * rp2.expected_usage, op2.psi(), dist,
                         opt);
}

}  // namespace rollduo
