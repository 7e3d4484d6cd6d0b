#pragma once

// Rate constants of dilated / contracted quantizer sequences.
//
// Given an L^r-optimal sequence alpha_n, the grid mu + theta (alpha_n - mu) is
// used as an L^s quantizer. Its L^s error is bounded below by Q_inf and, for
// s < r, above by Q_sup; the best scaling theta* minimizes the upper bound.
// Throughout, f_{theta,mu}(x) = f(mu + theta (x - mu)).
//
// Gaussian constants accept any dimension d (Sigma = sigma2 I): every integral
// then factors into a product of d identical one-dimensional integrals. The
// uniform-cube coefficient J_{s,d} is built in only for d = 1.

#include <optional>

#include "quantilab/distributions.hpp"
#include "quantilab/quadrature.hpp"

namespace quantilab {

struct RateQuery {
    DistributionSpec spec;
    double r = 2.0;
    double s = 1.0;
    double theta = 1.0;
    /// Translating number; defaults to m for the Gaussian and 0 otherwise.
    /// Only the Gaussian accepts a non-default value.
    std::optional<double> mu;
    /// User-supplied J_{s,d} and J_{r,d}, required when d >= 2.
    std::optional<double> j_sd;
    std::optional<double> j_rd;

    [[nodiscard]] double mu_value() const;
    void validate() const;
};

/// Open interval (theta_min, +inf).
struct ThetaRange {
    double theta_min = 0.0;

    [[nodiscard]] bool contains(double theta) const { return theta > theta_min; }
};

struct RateConstants {
    double q_r = 0.0;
    double q_s = 0.0;
    double c_fr = 0.0;
    double theta_star = 0.0;
    double q_inf = 0.0;
    /// Empty when s >= r (the upper constant there involves a non-explicit factor).
    std::optional<double> q_sup_sub;
    double condition_integral = 0.0;
    bool theta_admissible = false;
    /// s sits on the excluded point s = r + d (r + 1 for the one-sided families).
    bool boundary_case = false;
};

/// Scaling number minimizing the upper bound. Throws AdmissibilityError for a
/// Gamma law with s > r + 1 and shape a >= (s + r + 1) / s.
double theta_star(const DistributionSpec& spec, double r, double s);

ThetaRange admissible_theta_range(const DistributionSpec& spec, double r, double s);

/// True when s = r + d exactly, a point where the rate-optimality statement is silent.
bool is_boundary_case(const DistributionSpec& spec, double r, double s);

/// integral over {f > 0} of f_{theta,mu} f^{-s/(d+r)}; +inf when divergent.
double condition_integral(const RateQuery& query, const QuadratureOpts& opts = {});

/// integral over {f > 0} of f_{theta,mu}^{r/(r-s)} f^{-s/(r-s)}, for s < r; +inf when divergent.
double holder_integral(const RateQuery& query, const QuadratureOpts& opts = {});

/// theta^{s+d} J_{s,d} C_{f,r}^{s/d} times the condition integral.
double q_inf(const RateQuery& query, const QuadratureOpts& opts = {});

/// theta^{s+d} Q_r^{s/r} (holder integral)^{1-s/r}. Throws std::invalid_argument if s >= r.
double q_sup_sub(const RateQuery& query, const QuadratureOpts& opts = {});

/// The theta-dependent part of the upper bound, minimized at theta*:
/// theta^{s+d} (holder integral)^{1-s/r} for s < r, theta^{s+d} (condition integral) for s > r.
double theta_objective(const RateQuery& query, const QuadratureOpts& opts = {});

RateConstants rate_constants(const RateQuery& query, const QuadratureOpts& opts = {});

}  // namespace quantilab
