#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <utility>

namespace rollduo {

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NoSignChange : NumericError {
    using NumericError::NumericError;
};

struct NonFiniteValue : NumericError {
    using NumericError::NumericError;
};

struct NoConvergence : NumericError {
    using NumericError::NumericError;
};

inline constexpr double kDefaultTol = 1e-10;

struct BracketedFunction {
    std::function<double(double)> evaluator;
    double lo = 0.0;
    double hi = 0.0;
};

// Root of a continuous function that changes sign on [lo, hi]. Returns once the
// bracket is narrower than tol (or an exact zero is hit).
double bracketed_root(const BracketedFunction& f, double tol = kDefaultTol);

// Same as bracketed_root, but when f already has the sign of the root side at an
// endpoint (f(lo) >= 0 for increasing f), the endpoint is returned instead of
// throwing. Used for monotone equations whose root may sit on the boundary.
double clamped_increasing_root(const std::function<double(double)>& f, double lo, double hi,
                               double tol = kDefaultTol);

struct FixedPointResult {
    double x1 = 0.0;
    double x2 = 0.0;
    int iterations = 0;
};

using PairMap = std::function<std::pair<double, double>(double, double)>;

// Plain iteration x <- map(x). Throws NoConvergence after max_iter steps.
FixedPointResult fixed_point_pair(const PairMap& map, std::pair<double, double> init, double tol,
                                  int max_iter = 10000);

}  // namespace rollduo
