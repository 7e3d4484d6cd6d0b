#pragma once

// Internal: a density with its normalizing constant precomputed, for use
// inside quadrature integrands.

#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/gamma.hpp>

#include "quantilab/distributions.hpp"

namespace quantilab::detail {

class Density {
public:
    explicit Density(const DistributionSpec& spec) : family_(spec.family) {
        switch (family_) {
            case Family::Gaussian:
                center_ = spec.m;
                inv_var_ = 1.0 / spec.sigma2;
                log_norm_ = -0.5 * std::log(2.0 * std::numbers::pi * spec.sigma2);
                break;
            case Family::Exponential:
                rate_ = spec.lambda;
                log_norm_ = std::log(spec.lambda);
                break;
            case Family::Gamma:
                rate_ = spec.lambda;
                shape_ = spec.a;
                log_norm_ = spec.a * std::log(spec.lambda) - boost::math::lgamma(spec.a);
                break;
        }
    }

    [[nodiscard]] double log(double x) const {
        constexpr double kNegInf = -std::numeric_limits<double>::infinity();
        switch (family_) {
            case Family::Gaussian: {
                const double z = x - center_;
                return log_norm_ - 0.5 * z * z * inv_var_;
            }
            case Family::Exponential:
                return x < 0.0 ? kNegInf : log_norm_ - rate_ * x;
            case Family::Gamma:
                if (x < 0.0 || (x == 0.0 && shape_ > 1.0)) {
                    return kNegInf;
                }
                if (x == 0.0) {
                    return shape_ == 1.0 ? log_norm_ : std::numeric_limits<double>::infinity();
                }
                return log_norm_ + (shape_ - 1.0) * std::log(x) - rate_ * x;
        }
        return kNegInf;
    }

    [[nodiscard]] double operator()(double x) const { return std::exp(log(x)); }

    /// f'(x) for x inside the support.
    [[nodiscard]] double derivative(double x) const {
        const double fx = (*this)(x);
        switch (family_) {
            case Family::Gaussian:
                return -(x - center_) * inv_var_ * fx;
            case Family::Exponential:
                return x < 0.0 ? 0.0 : -rate_ * fx;
            case Family::Gamma:
                if (x <= 0.0) {
                    return 0.0;
                }
                return fx == 0.0 ? 0.0 : fx * ((shape_ - 1.0) / x - rate_);
        }
        return 0.0;
    }

private:
    Family family_;
    double center_ = 0.0;
    double inv_var_ = 1.0;
    double rate_ = 1.0;
    double shape_ = 1.0;
    double log_norm_ = 0.0;
};

/// |d|^r with fast paths for the common integer exponents.
inline double abs_pow(double d, double r) {
    const double ad = std::abs(d);
    if (r == 1.0) {
        return ad;
    }
    if (r == 2.0) {
        return ad * ad;
    }
    if (r == 3.0) {
        return ad * ad * ad;
    }
    if (r == 4.0) {
        const double sq = ad * ad;
        return sq * sq;
    }
    if (r == 0.0) {
        return 1.0;
    }
    return std::pow(ad, r);
}

}  // namespace quantilab::detail
