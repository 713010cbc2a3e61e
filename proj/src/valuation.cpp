#include "rollduo/valuation.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <limits>
#include <sstream>

namespace rollduo {

namespace bm = boost::math;

ValuationDistribution ValuationDistribution::uniform(double theta_max) {
    if (!(theta_max > 0.0) || !std::isfinite(theta_max)) throw ValuationError("uniform: theta_max must be positive");
    ValuationDistribution d;
    d.family_ = ValuationFamily::Uniform;
    d.theta_max_ = theta_max;
    d.ifr_ = true;
    return d;
}

ValuationDistribution ValuationDistribution::truncated_gamma(double shape, double scale, double trunc_quantile) {
    if (!(shape > 0.0) || !(scale > 0.0)) throw ValuationError("gamma: shape and scale must be positive");
    if (!(trunc_quantile > 0.99 && trunc_quantile < 1.0))
        throw ValuationError("gamma: trunc_quantile must lie in (0.99, 1)");
    ValuationDistribution d;
    d.family_ = ValuationFamily::GammaTruncated;
    d.shape_ = shape;
    d.scale_ = scale;
    try {
        d.theta_max_ = scale * bm::gamma_p_inv(shape, trunc_quantile);
        d.norm_ = bm::gamma_p(shape, d.theta_max_ / scale);
        d.q_at_max_ = bm::gamma_q(shape, d.theta_max_ / scale);
    } catch (const std::exception& e) {
        throw ValuationError(std::string("gamma quantile solve failed: ") + e.what());
    }
    if (!(d.theta_max_ > 0.0) || !std::isfinite(d.theta_max_)) throw ValuationError("gamma quantile solve failed");
    d.ifr_ = verify_ifr(d, 2000);
    return d;
}

ValuationDistribution ValuationDistribution::custom(std::function<double(double)> pdf,
                                                    std::function<double(double)> cdf, double theta_max,
                                                    std::function<double(double)> survival) {
    if (!pdf || !cdf) throw ValuationError("custom: pdf and cdf are required");
    if (!(theta_max > 0.0)) throw ValuationError("custom: theta_max must be positive");
    ValuationDistribution d;
    d.family_ = ValuationFamily::Custom;
    d.theta_max_ = theta_max;
    d.pdf_ = std::move(pdf);
    d.cdf_ = std::move(cdf);
    d.sf_ = std::move(survival);
    if (std::fabs(d.cdf_(0.0)) > 1e-9 || std::fabs(d.cdf_(theta_max) - 1.0) > 1e-9)
        throw ValuationError("custom: cdf must go from 0 to 1 on [0, theta_max]");
    d.ifr_ = verify_ifr(d, 2000);
    return d;
}

double ValuationDistribution::pdf(double theta) const {
    if (theta < 0.0 || theta > theta_max_) return 0.0;
    switch (family_) {
        case ValuationFamily::Uniform:
            return 1.0 / theta_max_;
        case ValuationFamily::GammaTruncated:
            if (theta == 0.0) {
                if (shape_ < 1.0) return std::numeric_limits<double>::infinity();
                if (shape_ > 1.0) return 0.0;
                return 1.0 / (scale_ * norm_);
            }
            return bm::gamma_p_derivative(shape_, theta / scale_) / (scale_ * norm_);
        case ValuationFamily::Custom:
            return pdf_(theta);
    }
    return 0.0;
}

double ValuationDistribution::cdf(double theta) const {
    if (theta <= 0.0) return 0.0;
    if (theta >= theta_max_) return 1.0;
    switch (family_) {
        case ValuationFamily::Uniform:
            return theta / theta_max_;
        case ValuationFamily::GammaTruncated:
            return bm::gamma_p(shape_, theta / scale_) / norm_;
        case ValuationFamily::Custom:
            return cdf_(theta);
    }
    return 0.0;
}

double ValuationDistribution::survival(double theta) const {
    if (theta <= 0.0) return 1.0;
    if (theta >= theta_max_) return 0.0;
    switch (family_) {
        case ValuationFamily::Uniform:
            return (theta_max_ - theta) / theta_max_;
        case ValuationFamily::GammaTruncated:
            return std::max(0.0, bm::gamma_q(shape_, theta / scale_) - q_at_max_) / norm_;
        case ValuationFamily::Custom:
            return sf_ ? sf_(theta) : 1.0 - cdf_(theta);
    }
    return 0.0;
}

double ValuationDistribution::gap(double theta) const {
    if (theta >= theta_max_) return 0.0;
    if (family_ == ValuationFamily::Uniform) return theta_max_ - std::max(theta, 0.0);
    const double h = pdf(theta);
    if (!(h > 0.0)) {
        std::ostringstream os;
        os << "zero density at theta=" << theta << " inside the support";
        throw ValuationError(os.str());
    }
    return survival(theta) / h;
}

double ValuationDistribution::mean() const {
    if (family_ == ValuationFamily::Uniform) return 0.5 * theta_max_;
    // E[theta] = integral of the survival function
    return bm::quadrature::gauss_kronrod<double, 61>::integrate([this](double t) { return survival(t); }, 0.0,
                                                                 theta_max_, 15, 1e-12);
}

ValuationDistribution make_uniform(double theta_max) { return ValuationDistribution::uniform(theta_max); }

ValuationDistribution make_truncated_gamma(double shape, double scale, double trunc_quantile) {
    return ValuationDistribution::truncated_gamma(shape, scale, trunc_quantile);
}

double failure_rate_gap(const ValuationDistribution& dist, double theta) {
    if (theta < 0.0 || theta > dist.theta_max()) throw ValuationError("failure_rate_gap: theta outside the support");
    return dist.gap(theta);
}

bool verify_ifr(const ValuationDistribution& dist, int grid_points) {
    if (grid_points < 100) throw ValuationError("verify_ifr needs at least 100 grid points");
    const double tm = dist.theta_max();
    double prev = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid_points; ++i) {
        const double t = (i + 0.5) * tm / grid_points;
        const double sf = dist.survival(t);
        if (!(sf > 0.0)) break;
        const double rate = dist.pdf(t) / sf;
        if (!std::isfinite(rate)) return false;
        if (rate - prev < -1e-9 * std::max(1.0, std::fabs(prev))) return false;
        prev = rate;
    }
    return true;
}

}  // namespace rollduo
