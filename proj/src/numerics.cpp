#include "rollduo/numerics.hpp"

#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include <cmath>
#include <cstdint>
#include <sstream>

namespace rollduo {

namespace {

double checked(const std::function<double(double)>& f, double x) {
    const double v = f(x);
    if (!std::isfinite(v)) {
        std::ostringstream os;
        os << "non-finite evaluation at x=" << x;
        throw NonFiniteValue(os.str());
    }
    return v;
}

}  // namespace

double bracketed_root(const BracketedFunction& bf, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("bracketed_root: tol must be positive");
    double lo = bf.lo, hi = bf.hi;
    if (lo > hi) std::swap(lo, hi);
    const double flo = checked(bf.evaluator, lo);
    if (flo == 0.0) return lo;
    const double fhi = checked(bf.evaluator, hi);
    if (fhi == 0.0) return hi;
    if ((flo < 0.0) == (fhi < 0.0)) {
        std::ostringstream os;
        os << "no sign change on [" << lo << ", " << hi << "]: f=" << flo << ", " << fhi;
        throw NoSignChange(os.str());
    }
    if (hi - lo <= tol) return 0.5 * (lo + hi);

    auto g = [&](double x) { return checked(bf.evaluator, x); };
    auto done = [tol](double a, double b) { return std::fabs(b - a) <= tol; };
    std::uintmax_t max_iter = 400;
    auto [a, b] = boost::math::tools::toms748_solve(g, lo, hi, flo, fhi, done, max_iter);
    // the bracket may stop short of tol if f is flat at machine precision
    if (std::fabs(b - a) > tol) {
        double fa = g(a);
        while (std::fabs(b - a) > tol) {
            const double m = 0.5 * (a + b);
            const double fm = g(m);
            if (fm == 0.0) return m;
            if ((fm < 0.0) == (fa < 0.0)) {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
        }
    }
    return 0.5 * (a + b);
}

double clamped_increasing_root(const std::function<double(double)>& f, double lo, double hi,
                               double tol) {
    if (hi <= lo) return lo;
    if (checked(f, lo) >= 0.0) return lo;
    if (checked(f, hi) <= 0.0) return hi;
    return bracketed_root({f, lo, hi}, tol);
}

FixedPointResult fixed_point_pair(const PairMap& map, std::pair<double, double> init, double tol,
                                  int max_iter) {
    if (!(tol > 0.0)) throw std::invalid_argument("fixed_point_pair: tol must be positive");
    double x1 = init.first, x2 = init.second;
    for (int it = 1; it <= max_iter; ++it) {
        auto [y1, y2] = map(x1, x2);
        if (!std::isfinite(y1) || !std::isfinite(y2))
            throw NonFiniteValue("fixed_point_pair: map returned a non-finite value");
        // report the point whose image was checked, so |map(x) - x| <= tol holds for it
        if (std::fabs(y1 - x1) <= tol && std::fabs(y2 - x2) <= tol) return {x1, x2, it};
        x1 = y1;
        x2 = y2;
    }
    std::ostringstream os;
    os << "fixed_point_pair: no convergence after " << max_iter << " iterations";
    throw NoConvergence(os.str());
}

}  // namespace rollduo
