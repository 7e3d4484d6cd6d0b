#include "quantilab/distributions.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <fmt/format.h>

#include "density.hpp"
#include "quantilab/errors.hpp"

namespace quantilab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument(fmt::format("{} must be positive and finite, got {}", name, v));
    }
}

void require_probability(double p, const char* what) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::invalid_argument(fmt::format("{}: probability must lie in (0, 1), got {}", what, p));
    }
}

// Forced breakpoints for a cell integral: the kink and, on infinite cells,
// the tail_mass_cut quantiles.
struct Breakpoints {
    std::array<double, 3> values{};
    std::size_t count = 0;

    void add(double x) { values[count++] = x; }
    [[nodiscard]] std::span<const double> span() const { return {values.data(), count}; }
};

Breakpoints cell_breakpoints(const DistributionSpec& spec, double a, double lo, double hi,
                             const QuadratureOpts& opts) {
    Breakpoints bp;
    bp.add(a);
    if (std::isinf(lo)) {
        bp.add(quantile(spec, opts.tail_mass_cut));
    }
    if (std::isinf(hi)) {
        bp.add(inverse_survival(spec, opts.tail_mass_cut));
    }
    return bp;
}

void check_cell(const DistributionSpec& spec, double a, double lo, double hi, double r) {
    require_one_dimensional(spec);
    if (!std::isfinite(a)) {
        throw std::invalid_argument("cell point must be finite");
    }
    if (std::isnan(lo) || std::isnan(hi) || lo > hi) {
        throw std::invalid_argument("cell bounds must satisfy lo <= hi");
    }
    require_positive(r, "r");
}

}  // namespace

std::string_view to_string(Family family) {
    switch (family) {
        case Family::Gaussian:
            return "gaussian";
        case Family::Exponential:
            return "exponential";
        case Family::Gamma:
            return "gamma";
    }
    return "unknown";
}

Family parse_family(std::string_view name) {
    if (name == "gaussian" || name == "normal") {
        return Family::Gaussian;
    }
    if (name == "exponential") {
        return Family::Exponential;
    }
    if (name == "gamma") {
        return Family::Gamma;
    }
    throw std::invalid_argument(fmt::format("unknown distribution family '{}'", name));
}

DistributionSpec DistributionSpec::gaussian(double m, double sigma2, int d) {
    DistributionSpec s{Family::Gaussian, m, sigma2, 1.0, 1.0, d};
    s.validate();
    return s;
}

DistributionSpec DistributionSpec::exponential(double lambda) {
    DistributionSpec s{Family::Exponential, 0.0, 1.0, lambda, 1.0, 1};
    s.validate();
    return s;
}

DistributionSpec DistributionSpec::gamma(double a, double lambda) {
    DistributionSpec s{Family::Gamma, 0.0, 1.0, lambda, a, 1};
    s.validate();
    return s;
}

void DistributionSpec::validate() const {
    if (d < 1) {
        throw std::invalid_argument("dimension d must be at least 1");
    }
    switch (family) {
        case Family::Gaussian:
            if (!std::isfinite(m)) {
                throw std::invalid_argument("Gaussian mean must be finite");
            }
            require_positive(sigma2, "sigma2");
            break;
        case Family::Exponential:
            require_positive(lambda, "lambda");
            if (d != 1) {
                throw UnsupportedDimensionError("the exponential law is one-dimensional");
            }
            break;
        case Family::Gamma:
            require_positive(lambda, "lambda");
            require_positive(a, "gamma shape a");
            if (d != 1) {
                throw UnsupportedDimensionError("the gamma law is one-dimensional");
            }
            break;
    }
}

double DistributionSpec::support_lo() const {
    return family == Family::Gaussian ? -kInf : 0.0;
}

double DistributionSpec::support_hi() const { return kInf; }

double DistributionSpec::scale() const {
    switch (family) {
        case Family::Gaussian:
            return std::sqrt(sigma2);
        case Family::Exponential:
            return 1.0 / lambda;
        case Family::Gamma:
            return std::sqrt(a) / lambda;
    }
    return 1.0;
}

double DistributionSpec::mode() const {
    switch (family) {
        case Family::Gaussian:
            return m;
        case Family::Exponential:
            return 0.0;
        case Family::Gamma:
            return a > 1.0 ? (a - 1.0) / lambda : 0.0;
    }
    return 0.0;
}

double DistributionSpec::center() const { return family == Family::Gaussian ? m : 0.0; }

bool DistributionSpec::log_concave() const { return family != Family::Gamma || a >= 1.0; }

std::string describe(const DistributionSpec& spec) {
    switch (spec.family) {
        case Family::Gaussian:
            return spec.d == 1 ? fmt::format("gaussian(m={}, sigma2={})", spec.m, spec.sigma2)
                               : fmt::format("gaussian(m={}, sigma2={}, d={})", spec.m,
                                             spec.sigma2, spec.d);
        case Family::Exponential:
            return fmt::format("exponential(lambda={})", spec.lambda);
        case Family::Gamma:
            return fmt::format("gamma(a={}, lambda={})", spec.a, spec.lambda);
    }
    return "unknown";
}

void require_one_dimensional(const DistributionSpec& spec) {
    spec.validate();
    if (spec.d != 1) {
        throw UnsupportedDimensionError(
            fmt::format("operation needs a one-dimensional law, got d = {}", spec.d));
    }
}

double pdf(const DistributionSpec& spec, double x) {
    require_one_dimensional(spec);
    return detail::Density(spec)(x);
}

double log_pdf(const DistributionSpec& spec, double x) {
    require_one_dimensional(spec);
    return detail::Density(spec).log(x);
}

double pdf_derivative(const DistributionSpec& spec, double x) {
    require_one_dimensional(spec);
    return detail::Density(spec).derivative(x);
}

double cdf(const DistributionSpec& spec, double x) {
    require_one_dimensional(spec);
    if (std::isnan(x)) {
        throw std::invalid_argument("cdf: x is NaN");
    }
    switch (spec.family) {
        case Family::Gaussian: {
            const double z = (x - spec.m) / std::sqrt(2.0 * spec.sigma2);
            return 0.5 * std::erfc(-z);
        }
        case Family::Exponential:
            return x <= 0.0 ? 0.0 : -std::expm1(-spec.lambda * x);
        case Family::Gamma:
            if (x <= 0.0) {
                return 0.0;
            }
            if (std::isinf(x)) {
                return 1.0;
            }
            return boost::math::gamma_p(spec.a, spec.lambda * x);
    }
    return 0.0;
}

double survival(const DistributionSpec& spec, double x) {
    require_one_dimensional(spec);
    if (std::isnan(x)) {
        throw std::invalid_argument("survival: x is NaN");
    }
    switch (spec.family) {
        case Family::Gaussian: {
            const double z = (x - spec.m) / std::sqrt(2.0 * spec.sigma2);
            return 0.5 * std::erfc(z);
        }
        case Family::Exponential:
            return x <= 0.0 ? 1.0 : std::exp(-spec.lambda * x);
        case Family::Gamma:
            if (x <= 0.0) {
                return 1.0;
            }
            if (std::isinf(x)) {
                return 0.0;
            }
            return boost::math::gamma_q(spec.a, spec.lambda * x);
    }
    return 0.0;
}

double quantile(const DistributionSpec& spec, double p) {
    require_one_dimensional(spec);
    require_probability(p, "quantile");
    switch (spec.family) {
        case Family::Gaussian:
            return spec.m - std::sqrt(2.0 * spec.sigma2) * boost::math::erfc_inv(2.0 * p);
        case Family::Exponential:
            return -std::log1p(-p) / spec.lambda;
        case Family::Gamma:
            return boost::math::gamma_p_inv(spec.a, p) / spec.lambda;
    }
    return 0.0;
}

double inverse_survival(const DistributionSpec& spec, double q) {
    require_one_dimensional(spec);
    require_probability(q, "inverse_survival");
    switch (spec.family) {
        case Family::Gaussian:
            return spec.m + std::sqrt(2.0 * spec.sigma2) * boost::math::erfc_inv(2.0 * q);
        case Family::Exponential:
            return -std::log(q) / spec.lambda;
        case Family::Gamma:
            return boost::math::gamma_q_inv(spec.a, q) / spec.lambda;
    }
    return 0.0;
}

double interval_mass(const DistributionSpec& spec, double lo, double hi) {
    if (std::isnan(lo) || std::isnan(hi) || lo > hi) {
        throw std::invalid_argument("interval_mass: require lo <= hi");
    }
    const double median = quantile(spec, 0.5);
    if (lo >= median) {
        return survival(spec, lo) - survival(spec, hi);
    }
    if (hi <= median) {
        return cdf(spec, hi) - cdf(spec, lo);
    }
    return survival(spec, lo) - survival(spec, hi);
}

double cell_moment(const DistributionSpec& spec, double a, double lo, double hi, double r,
                   const QuadratureOpts& opts) {
    check_cell(spec, a, lo, hi, r);
    lo = std::max(lo, spec.support_lo());
    hi = std::min(hi, spec.support_hi());
    if (lo >= hi) {
        return 0.0;
    }
    const detail::Density f(spec);
    const auto bp = cell_breakpoints(spec, a, lo, hi, opts);
    auto integrand = [&](double x) {
        const double fx = f(x);
        return fx == 0.0 ? 0.0 : detail::abs_pow(x - a, r) * fx;
    };
    return integrate(integrand, lo, hi, opts, bp.span(), spec.scale()).value;
}

double cell_gradient(const DistributionSpec& spec, double a, double lo, double hi, double r,
                     const QuadratureOpts& opts) {
    check_cell(spec, a, lo, hi, r);
    if (r < 1.0) {
        throw std::invalid_argument("cell_gradient requires r >= 1");
    }
    lo = std::max(lo, spec.support_lo());
    hi = std::min(hi, spec.support_hi());
    if (lo >= hi) {
        return 0.0;
    }
    const detail::Density f(spec);
    const auto bp = cell_breakpoints(spec, a, lo, hi, opts);
    auto integrand = [&](double x) {
        const double fx = f(x);
        if (fx == 0.0) {
            return 0.0;
        }
        const double w = detail::abs_pow(x - a, r - 1.0) * fx;
        return x < a ? w : -w;
    };
    return r * integrate(integrand, lo, hi, opts, bp.span(), spec.scale()).value;
}

double cell_curvature(const DistributionSpec& spec, double a, double lo, double hi, double r,
                      const QuadratureOpts& opts) {
    check_cell(spec, a, lo, hi, r);
    if (r < 1.0) {
        throw std::invalid_argument("cell_curvature requires r >= 1");
    }
    lo = std::max(lo, spec.support_lo());
    hi = std::min(hi, spec.support_hi());
    if (lo >= hi) {
        return 0.0;
    }
    if (spec.family == Family::Gamma && spec.a < 1.0 && lo <= 0.0) {
        // f is unbounded at the support end; fall back to a central difference.
        const double h = 1e-6 * std::max(spec.scale(), std::abs(a));
        return (cell_gradient(spec, a + h, lo, hi, r, opts) -
                cell_gradient(spec, a - h, lo, hi, r, opts)) /
               (2.0 * h);
    }
    // Differentiating under the integral after the shift x = a -/+ u moves the
    // derivative onto f, which keeps the integrand bounded for 1 <= r < 2.
    const detail::Density f(spec);
    const auto bp = cell_breakpoints(spec, a, lo, hi, opts);
    auto integrand = [&](double x) {
        const double dfx = f.derivative(x);
        if (dfx == 0.0) {
            return 0.0;
        }
        const double w = detail::abs_pow(x - a, r - 1.0) * dfx;
        return x < a ? w : -w;
    };
    double total = integrate(integrand, lo, hi, opts, bp.span(), spec.scale()).value;
    if (std::isfinite(lo)) {
        total += detail::abs_pow(a - lo, r - 1.0) * f(lo);
    }
    if (std::isfinite(hi)) {
        total += detail::abs_pow(hi - a, r - 1.0) * f(hi);
    }
    return r * total;
}

double c_fr(const DistributionSpec& spec, double r) {
    spec.validate();
    require_positive(r, "r");
    switch (spec.family) {
        case Family::Gaussian: {
            const double d = spec.d;
            // ((2 pi)^d det Sigma)^{r / (2 (r + d))} ((d + r) / d)^{d / 2}, det Sigma = sigma2^d
            const double log_det_term = d * std::log(2.0 * std::numbers::pi * spec.sigma2);
            return std::exp(r / (2.0 * (r + d)) * log_det_term + 0.5 * d * std::log((d + r) / d));
        }
        case Family::Exponential:
            return std::pow(spec.lambda, -r / (1.0 + r)) * (1.0 + r);
        case Family::Gamma: {
            const double a = spec.a;
            const double k = (r + a) / (r + 1.0);
            return std::exp(boost::math::lgamma(k) - boost::math::lgamma(a) / (1.0 + r) -
                            r / (r + 1.0) * std::log(spec.lambda) + k * std::log(r + 1.0));
        }
    }
    return 0.0;
}

double j_r1(double r) {
    require_positive(r, "r");
    return 1.0 / ((r + 1.0) * std::pow(2.0, r));
}

double zador_q(const DistributionSpec& spec, double r, std::optional<double> j_rd) {
    spec.validate();
    require_positive(r, "r");
    double j = 0.0;
    if (j_rd) {
        require_positive(*j_rd, "J_{r,d}");
        j = *j_rd;
    } else if (spec.d == 1) {
        j = j_r1(r);
    } else {
        throw UnsupportedDimensionError(
            fmt::format("J_{{r,d}} is only built in for d = 1 (got d = {}); supply it explicitly",
                        spec.d));
    }
    const double d = spec.d;
    return j * std::pow(c_fr(spec, r), (d + r) / d);
}

DistributionSpec empirical_measure(const DistributionSpec& spec, double s) {
    spec.validate();
    require_positive(s, "s");
    DistributionSpec out = spec;
    switch (spec.family) {
        case Family::Gaussian:
            out.sigma2 = spec.sigma2 * (spec.d + s) / spec.d;
            break;
        case Family::Exponential:
            out.lambda = spec.lambda / (1.0 + s);
            break;
        case Family::Gamma:
            out.a = (spec.a + s) / (1.0 + s);
            out.lambda = spec.lambda / (1.0 + s);
            break;
    }
    return out;
}

double empirical_density(const DistributionSpec& spec, double s, double x) {
    require_one_dimensional(spec);
    require_positive(s, "s");
    const double lf = detail::Density(spec).log(x);
    if (std::isinf(lf) && lf < 0.0) {
        return 0.0;
    }
    const double d = spec.d;
    return std::exp(lf * d / (d + s)) / c_fr(spec, s);
}

}  // namespace quantilab
