#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace rollduo {

enum class ValuationFamily { Uniform, GammaTruncated, Custom };

struct ValuationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IfrViolation : ValuationError {
    using ValuationError::ValuationError;
};

// Population law of the data valuation theta on [0, theta_max].
class ValuationDistribution {
public:
    static ValuationDistribution uniform(double theta_max);
    static ValuationDistribution truncated_gamma(double shape, double scale, double trunc_quantile);
    // pdf/cdf must already be normalized on [0, theta_max]. survival is optional;
    // when absent 1 - cdf is used.
    static ValuationDistribution custom(std::function<double(double)> pdf, std::function<double(double)> cdf,
                                        double theta_max, std::function<double(double)> survival = {});

    double pdf(double theta) const;
    double cdf(double theta) const;
    double survival(double theta) const;  // 1 - H, computed without cancellation where possible
    // (1 - H) / h
    double gap(double theta) const;
    double theta_max() const { return theta_max_; }
    ValuationFamily family() const { return family_; }
    double mean() const;
    bool is_ifr() const { return ifr_; }
    double shape() const { return shape_; }
    double scale() const { return scale_; }

private:
    ValuationFamily family_ = ValuationFamily::Uniform;
    double theta_max_ = 1.0;
    double shape_ = 0.0;
    double scale_ = 0.0;
    double norm_ = 1.0;      // gamma cdf at theta_max
    double q_at_max_ = 0.0;  // gamma upper tail at theta_max
    std::function<double(double)> pdf_, cdf_, sf_;
    bool ifr_ = true;
};

ValuationDistribution make_uniform(double theta_max);
ValuationDistribution make_truncated_gamma(double shape, double scale, double trunc_quantile = 0.9999);

double failure_rate_gap(const ValuationDistribution& dist, double theta);

// h / (1 - H) non-decreasing on a midpoint grid of grid_points cells.
bool verify_ifr(const ValuationDistribution& dist, int grid_points);

}  // namespace rollduo
