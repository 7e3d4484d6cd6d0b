#pragma once

// Analytic models of the Gaussian, exponential and gamma laws: densities,
// quantiles, per-cell moment integrals, and the closed-form constants of
// optimal quantization (C_{f,r}, J_{r,1}, the Zador constant Q_r).

#include <optional>
#include <string>
#include <string_view>

#include "quantilab/quadrature.hpp"

namespace quantilab {

enum class Family { Gaussian, Exponential, Gamma };

std::string_view to_string(Family family);
Family parse_family(std::string_view name);

/// A named one-dimensional law. For the Gaussian, `d` is the dimension of an
/// isotropic N(m, sigma2 I_d); the closed-form constants use it, everything
/// that touches a concrete grid requires d = 1.
struct DistributionSpec {
    Family family = Family::Gaussian;
    double m = 0.0;       // Gaussian mean
    double sigma2 = 1.0;  // Gaussian variance
    double lambda = 1.0;  // exponential / gamma rate
    double a = 1.0;       // gamma shape
    int d = 1;

    static DistributionSpec gaussian(double m = 0.0, double sigma2 = 1.0, int d = 1);
    static DistributionSpec exponential(double lambda = 1.0);
    static DistributionSpec gamma(double a, double lambda = 1.0);

    /// Throws std::invalid_argument on non-positive scale/shape or d < 1.
    void validate() const;

    [[nodiscard]] double support_lo() const;
    [[nodiscard]] double support_hi() const;
    /// Natural length scale: sigma, 1/lambda, or sqrt(a)/lambda.
    [[nodiscard]] double scale() const;
    /// Mode of the density (0 for the gamma with a <= 1).
    [[nodiscard]] double mode() const;
    /// Natural dilatation centre: the mean for the Gaussian, 0 otherwise.
    [[nodiscard]] double center() const;
    /// True when the density is log-concave (all Gaussians/exponentials, gamma a >= 1).
    [[nodiscard]] bool log_concave() const;

    friend bool operator==(const DistributionSpec&, const DistributionSpec&) = default;
};

std::string describe(const DistributionSpec& spec);

/// Validates the distribution and throws UnsupportedDimensionError unless d = 1.
void require_one_dimensional(const DistributionSpec& spec);

double pdf(const DistributionSpec& spec, double x);
/// log f(x); -inf outside the support.
double log_pdf(const DistributionSpec& spec, double x);
/// f'(x) inside the support.
double pdf_derivative(const DistributionSpec& spec, double x);
double cdf(const DistributionSpec& spec, double x);
/// 1 - cdf, computed without cancellation in the upper tail.
double survival(const DistributionSpec& spec, double x);
/// Inverse cdf; throws std::invalid_argument unless 0 < p < 1.
double quantile(const DistributionSpec& spec, double p);
/// Inverse survival function; throws std::invalid_argument unless 0 < q < 1.
double inverse_survival(const DistributionSpec& spec, double q);
/// P((lo, hi)), accurate in either tail.
double interval_mass(const DistributionSpec& spec, double lo, double hi);

/// Integral of |x - a|^r f(x) over [lo, hi]; x = a is a forced breakpoint.
double cell_moment(const DistributionSpec& spec, double a, double lo, double hi, double r,
                   const QuadratureOpts& opts = {});

/// d/da of cell_moment with [lo, hi] held fixed:
/// r * integral of |x - a|^(r-1) sign(a - x) f(x). Requires r >= 1.
double cell_gradient(const DistributionSpec& spec, double a, double lo, double hi, double r,
                     const QuadratureOpts& opts = {});

/// d/da of cell_gradient with [lo, hi] held fixed. Requires r >= 1.
double cell_curvature(const DistributionSpec& spec, double a, double lo, double hi, double r,
                      const QuadratureOpts& opts = {});

/// C_{f,r} = integral of f^{d/(d+r)}, closed form.
double c_fr(const DistributionSpec& spec, double r);

/// J_{r,1} = 1 / ((r + 1) 2^r), the uniform-interval quantization coefficient.
double j_r1(double r);

/// Q_r(P) = J_{r,d} C_{f,r}^{(d+r)/d}. For d >= 2 the caller must supply J_{r,d}.
double zador_q(const DistributionSpec& spec, double r, std::optional<double> j_rd = std::nullopt);

/// The law P_s with density f^{d/(d+s)} / C_{f,s}. For the three families it is
/// again a member of the same family.
DistributionSpec empirical_measure(const DistributionSpec& spec, double s);

/// Density of P_s at x.
double empirical_density(const DistributionSpec& spec, double s, double x);

}  // namespace quantilab
