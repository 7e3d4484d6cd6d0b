#include "quantilab/dilatation.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "density.hpp"
#include "quantilab/errors.hpp"

namespace quantilab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_exponents(double r, double s) {
    if (!(r > 0.0) || !std::isfinite(r) || !(s > 0.0) || !std::isfinite(s)) {
        throw std::invalid_argument("r and s must be positive and finite");
    }
}

double dim(const DistributionSpec& spec) { return static_cast<double>(spec.d); }

// Same law restricted to one coordinate.
DistributionSpec marginal(const DistributionSpec& spec) {
    DistributionSpec one = spec;
    one.d = 1;
    return one;
}

// One-dimensional integral of exp(p * log f(mu + theta (x - mu)) - q * log f(x))
// over the support. `decay` is the rate of the integrand's exponential tail in
// units of the distribution's scale, used to size the tail map.
double log_space_integral(const DistributionSpec& spec1, double theta, double mu, double p,
                          double q, double decay, const QuadratureOpts& opts) {
    const detail::Density f(spec1);
    auto integrand = [&](double x) {
        const double lf_theta = f.log(mu + theta * (x - mu));
        const double lf = f.log(x);
        if (std::isinf(lf_theta) && lf_theta < 0.0) {
            return 0.0;
        }
        return std::exp(p * lf_theta - q * lf);
    };
    const double tail = spec1.scale() / std::sqrt(std::max(decay, 1e-6));
    if (spec1.family == Family::Gaussian) {
        const double knots[] = {spec1.m, mu};
        return integrate(integrand, -kInf, kInf, opts, knots, tail).value;
    }
    const double knots[] = {spec1.mode()};
    return integrate(integrand, 0.0, kInf, opts, knots, tail).value;
}

double j_for(const DistributionSpec& spec, double exponent, const std::optional<double>& supplied) {
    if (supplied) {
        if (!(*supplied > 0.0)) {
            throw std::invalid_argument("a supplied J constant must be positive");
        }
        return *supplied;
    }
    if (spec.d != 1) {
        throw UnsupportedDimensionError(fmt::format(
            "J_{{{},{}}} is only built in for d = 1; supply it explicitly", exponent, spec.d));
    }
    return j_r1(exponent);
}

}  // namespace

double RateQuery::mu_value() const {
    if (mu) {
        return *mu;
    }
    return spec.family == Family::Gaussian ? spec.m : 0.0;
}

void RateQuery::validate() const {
    spec.validate();
    check_exponents(r, s);
    if (!(theta > 0.0) || !std::isfinite(theta)) {
        throw std::invalid_argument("theta must be positive and finite");
    }
    if (mu && !std::isfinite(*mu)) {
        throw std::invalid_argument("mu must be finite");
    }
    if (spec.family != Family::Gaussian && mu_value() != 0.0) {
        // any shift breaks the support inclusion {f > 0} within mu(1 - theta) + theta {f > 0}
        throw AdmissibilityError(
            fmt::format("{} supports only mu = 0 (got {})", to_string(spec.family), mu_value()));
    }
}

double theta_star(const DistributionSpec& spec, double r, double s) {
    spec.validate();
    check_exponents(r, s);
    switch (spec.family) {
        case Family::Gaussian:
            return std::sqrt((s + dim(spec)) / (r + dim(spec)));
        case Family::Exponential:
            return (s + 1.0) / (r + 1.0);
        case Family::Gamma:
            if (s > r + 1.0 && !(spec.a < (s + r + 1.0) / s)) {
                throw AdmissibilityError(fmt::format(
                    "Gamma shape a = {} lies outside (0, (s+r+1)/s) = (0, {}) for s > r + 1",
                    spec.a, (s + r + 1.0) / s));
            }
            // The minimizer of the upper bound, for s < r as well as s > r.
            return (s + spec.a) / (r + spec.a);
    }
    throw std::logic_error("unknown family");
}

// For s >= r the threshold is where the condition integral starts to converge;
// for s < r it is where the Hoelder integral does.
ThetaRange admissible_theta_range(const DistributionSpec& spec, double r, double s) {
    spec.validate();
    check_exponents(r, s);
    if (spec.family == Family::Gaussian) {
        return {s >= r ? std::sqrt(s / (dim(spec) + r)) : std::sqrt(s / r)};
    }
    return {s >= r ? s / (r + 1.0) : s / r};
}

bool is_boundary_case(const DistributionSpec& spec, double r, double s) {
    return s == r + dim(spec);
}

double condition_integral(const RateQuery& query, const QuadratureOpts& opts) {
    query.validate();
    opts.validate();
    const auto& spec = query.spec;
    const double d = dim(spec);
    const double p = query.s / (d + query.r);
    // divergence is decided from the family thresholds, not by quadrature
    double decay = 0.0;
    switch (spec.family) {
        case Family::Gaussian:
            decay = query.theta * query.theta - p;
            break;
        case Family::Exponential:
            decay = query.theta - p;
            break;
        case Family::Gamma:
            decay = query.theta - p;
            // behaviour at 0: x^{(a-1)(1-p)} must be integrable
            if (!(spec.a * (query.r + 1.0 - query.s) + query.s > 0.0)) {
                return kInf;
            }
            break;
    }
    if (!(decay > 0.0)) {
        return kInf;
    }
    const double one = log_space_integral(marginal(spec), query.theta, query.mu_value(), 1.0, p,
                                          decay, opts);
    return std::pow(one, d);
}

double holder_integral(const RateQuery& query, const QuadratureOpts& opts) {
    query.validate();
    opts.validate();
    if (!(query.s < query.r)) {
        throw std::invalid_argument("the Hoelder factor needs s < r");
    }
    const auto& spec = query.spec;
    const double r = query.r;
    const double s = query.s;
    const double decay = spec.family == Family::Gaussian ? query.theta * query.theta - s / r
                                                         : query.theta - s / r;
    if (!(decay > 0.0)) {
        return kInf;
    }
    const double one = log_space_integral(marginal(spec), query.theta, query.mu_value(),
                                          r / (r - s), s / (r - s), decay, opts);
    return std::pow(one, dim(spec));
}

double q_inf(const RateQuery& query, const QuadratureOpts& opts) {
    const double cond = condition_integral(query, opts);
    const double j_s = j_for(query.spec, query.s, query.j_sd);
    if (std::isinf(cond)) {
        return kInf;
    }
    const double d = dim(query.spec);
    return std::pow(query.theta, query.s + d) * j_s *
           std::pow(c_fr(query.spec, query.r), query.s / d) * cond;
}

double q_sup_sub(const RateQuery& query, const QuadratureOpts& opts) {
    query.validate();
    if (!(query.s < query.r)) {
        throw std::invalid_argument(
            fmt::format("q_sup_sub needs s < r (got s = {}, r = {})", query.s, query.r));
    }
    const double holder = holder_integral(query, opts);
    const double q_r = zador_q(query.spec, query.r, query.j_rd ? query.j_rd : std::nullopt);
    if (std::isinf(holder)) {
        return kInf;
    }
    const double d = dim(query.spec);
    return std::pow(query.theta, query.s + d) * std::pow(q_r, query.s / query.r) *
           std::pow(holder, 1.0 - query.s / query.r);
}

double theta_objective(const RateQuery& query, const QuadratureOpts& opts) {
    const double d = dim(query.spec);
    const double lead = std::pow(query.theta, query.s + d);
    if (query.s < query.r) {
        return lead * std::pow(holder_integral(query, opts), 1.0 - query.s / query.r);
    }
    return lead * condition_integral(query, opts);
}

RateConstants rate_constants(const RateQuery& query, const QuadratureOpts& opts) {
    query.validate();
    RateConstants out;
    out.c_fr = c_fr(query.spec, query.r);
    out.q_r = zador_q(query.spec, query.r, query.j_rd);
    out.q_s = zador_q(query.spec, query.s, query.j_sd);
    out.theta_star = theta_star(query.spec, query.r, query.s);
    out.theta_admissible = admissible_theta_range(query.spec, query.r, query.s).contains(query.theta);
    out.boundary_case = is_boundary_case(query.spec, query.r, query.s);
    out.condition_integral = condition_integral(query, opts);
    out.q_inf = q_inf(query, opts);
    if (query.s < query.r) {
        out.q_sup_sub = q_sup_sub(query, opts);
    }
    return out;
}

}  // namespace quantilab
