#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <tuple>

#include "oracles.hpp"
#include "quantilab/distributions.hpp"
#include "quantilab/errors.hpp"

using namespace quantilab;
using doctest::Approx;

namespace {
const double kInf = std::numeric_limits<double>::infinity();

constexpr double kPi = std::numbers::pi;

const DistributionSpec kNormal = DistributionSpec::gaussian(0.0, 1.0);
const DistributionSpec kExp = DistributionSpec::exponential(1.0);

// Reference integral of f^{1/(1+r)} by Simpson, for the three families.
long double cfr_by_simpson(const DistributionSpec& spec, double r) {
    const long double p = 1.0L / (1.0L + r);
    switch (spec.family) {
        case Family::Gaussian:
            return oracle::simpson(
                [&](long double x) { return std::pow(oracle::normal_pdf(x, spec.m, spec.sigma2), p); },
                spec.m - 80.0L, spec.m + 80.0L, 200000);
        case Family::Exponential:
            return oracle::simpson(
                [&](long double x) { return std::pow(oracle::exp_pdf(x, spec.lambda), p); }, 0.0L,
                400.0L / spec.lambda, 400000);
        case Family::Gamma: {
            // x = t^(1+r) removes the power cusp at 0 for integer shapes
            const long double k = 1.0L + r;
            return oracle::simpson(
                [&](long double t) {
                    const long double x = std::pow(t, k);
                    return std::pow(oracle::gamma_pdf(x, spec.a, spec.lambda), p) * k * std::pow(t, k - 1);
                },
                0.0L, std::pow(600.0L / spec.lambda, 1.0L / k), 400000);
        }
    }
    return 0;
}

}  // namespace

TEST_CASE("spec validation and helpers") {
    CHECK_THROWS_AS(DistributionSpec::gaussian(0.0, -1.0).validate(), std::invalid_argument);
    CHECK_THROWS_AS(DistributionSpec::exponential(0.0).validate(), std::invalid_argument);
    CHECK_THROWS_AS(DistributionSpec::gamma(-2.0).validate(), std::invalid_argument);
    DistributionSpec e2 = kExp;
    e2.d = 2;
    CHECK_THROWS_AS(e2.validate(), UnsupportedDimensionError);
    CHECK_THROWS_AS(require_one_dimensional(DistributionSpec::gaussian(0, 1, 3)),
                    UnsupportedDimensionError);
    CHECK(parse_family("normal") == Family::Gaussian);
    CHECK(parse_family("gamma") == Family::Gamma);
    CHECK_THROWS_AS(parse_family("cauchy"), std::invalid_argument);
    CHECK(DistributionSpec::gamma(0.5).log_concave() == false);
    CHECK(DistributionSpec::gamma(3.0).log_concave());
}

TEST_CASE("pdf examples") {
    CHECK(pdf(kNormal, 0.0) == Approx(1.0 / std::sqrt(2.0 * kPi)).epsilon(1e-15));
    CHECK(pdf(kExp, 0.0) == Approx(1.0));
    CHECK(pdf(kExp, -1.0) == 0.0);
    // e^{-1} / 720
    CHECK(pdf(DistributionSpec::gamma(7.0, 1.0), 1.0) ==
          Approx(0.0005109436682936698911).epsilon(1e-14));
    CHECK(pdf(DistributionSpec::gamma(7.0, 1.0), -0.5) == 0.0);
    CHECK(pdf(DistributionSpec::gaussian(2.0, 4.0), 3.0) ==
          Approx(static_cast<double>(oracle::normal_pdf(3.0L, 2.0L, 4.0L))).epsilon(1e-14));
}

TEST_CASE("pdf derivative matches finite differences") {
    for (const auto& spec : {kNormal, kExp, DistributionSpec::gamma(3.5, 2.0)}) {
        for (double x : {0.3, 1.1, 2.5}) {
            const double fd = oracle::central_diff([&](double t) { return pdf(spec, t); }, x, 1e-6);
            CHECK(pdf_derivative(spec, x) == Approx(fd).epsilon(1e-7));
        }
    }
}

TEST_CASE("quantile examples") {
    CHECK(quantile(kNormal, 0.5) == Approx(0.0).epsilon(1e-15));
    CHECK(quantile(kExp, 0.5) == Approx(std::log(2.0)).epsilon(1e-15));
    const double bis = oracle::bisect([](double x) { return oracle::gamma2_cdf(x) - 0.5; }, 0.0, 10.0);
    CHECK(quantile(DistributionSpec::gamma(2.0), 0.5) == Approx(bis).epsilon(1e-12));
    CHECK(quantile(DistributionSpec::gamma(2.0), 0.5) ==
          Approx(1.6783469900166606534).epsilon(1e-14));
    CHECK_THROWS_AS(quantile(kNormal, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(quantile(kNormal, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(inverse_survival(kExp, 1.5), std::invalid_argument);
}

TEST_CASE("cdf and quantile round-trip, including far tails") {
    for (const auto& spec : {kNormal, kExp, DistributionSpec::gamma(7.0), DistributionSpec::gamma(0.4, 3.0),
                             DistributionSpec::gaussian(-1.0, 0.25)}) {
        for (double p : {1e-12, 1e-6, 0.1, 0.5, 0.9}) {
            CHECK(cdf(spec, quantile(spec, p)) == Approx(p).epsilon(1e-12));
            CHECK(survival(spec, inverse_survival(spec, p)) == Approx(p).epsilon(1e-12));
        }
    }
    CHECK(interval_mass(kNormal, 30.0, INFINITY) > 0.0);
    CHECK(interval_mass(kNormal, -INFINITY, INFINITY) == Approx(1.0));
}

TEST_CASE("pdf integrates to one") {
    for (const auto& spec : {kNormal, kExp, DistributionSpec::gamma(7.0), DistributionSpec::gamma(2.5, 0.5),
                             DistributionSpec::gaussian(3.0, 9.0)}) {
        const auto res = integrate([&](double x) { return pdf(spec, x); }, spec.support_lo(),
                                   INFINITY, QuadratureOpts{}, {}, spec.scale());
        CHECK(res.value == Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("cell_moment examples") {
    CHECK(cell_moment(kNormal, 0.0, -INFINITY, INFINITY, 2.0) == Approx(1.0).epsilon(1e-12));
    CHECK(cell_moment(kExp, 1.0, 0.0, INFINITY, 2.0) == Approx(1.0).epsilon(1e-12));
    CHECK(cell_moment(kNormal, 0.0, -INFINITY, INFINITY, 1.0) ==
          Approx(std::sqrt(2.0 / kPi)).epsilon(1e-12));
    // a cell straddling the kink, against Simpson split at the kink
    const long double ref = oracle::simpson_pieces(
        [](long double x) { return std::pow(std::abs(x - 0.4L), 3.0L) * oracle::normal_pdf(x); },
        {-0.7L, 0.4L, 1.9L});
    CHECK(cell_moment(kNormal, 0.4, -0.7, 1.9, 3.0) == Approx(static_cast<double>(ref)).epsilon(1e-11));
}

TEST_CASE("cell_moment is additive over splits") {
    const QuadratureOpts opts;
    for (const auto& spec : {kNormal, kExp, DistributionSpec::gamma(7.0)}) {
        for (double r : {1.0, 2.0, 4.0}) {
            const double whole = cell_moment(spec, 1.2, 0.1, INFINITY, r, opts);
            const double parts = cell_moment(spec, 1.2, 0.1, 2.0, r, opts) +
                                 cell_moment(spec, 1.2, 2.0, INFINITY, r, opts);
            CHECK(std::abs(whole - parts) <= 2 * opts.abs_tol + 1e-12 * whole);
        }
    }
}

TEST_CASE("cell_gradient examples") {
    for (double r : {1.0, 1.5, 2.0, 4.0}) {
        CHECK(std::abs(cell_gradient(kNormal, 0.0, -INFINITY, INFINITY, r)) < 1e-13);
    }
    CHECK(std::abs(cell_gradient(kExp, 1.0, 0.0, INFINITY, 2.0)) < 1e-13);
    CHECK(std::abs(cell_gradient(kExp, std::log(2.0), 0.0, INFINITY, 1.0)) < 1e-13);
    CHECK_THROWS_AS(cell_gradient(kNormal, 0.0, -1.0, 1.0, 0.5), std::invalid_argument);
}

TEST_CASE("cell_gradient equals the finite difference of cell_moment") {
    for (const auto& spec : {kNormal, kExp, DistributionSpec::gamma(7.0), DistributionSpec::gamma(2.0, 3.0)}) {
        for (double r : {1.5, 2.0, 4.0}) {
            for (const auto& [a, lo, hi] : {std::tuple{0.7, 0.2, 1.5}, std::tuple{2.5, 1.0, kInf},
                                             std::tuple{0.4, -kInf, 0.9}}) {
                const double fd = oracle::central_diff(
                    [&](double t) { return cell_moment(spec, t, lo, hi, r); }, a, 1e-5);
                const double g = cell_gradient(spec, a, lo, hi, r);
                CHECK(std::abs(g - fd) <= 1e-5 * std::abs(fd) + 1e-12);
            }
        }
    }
}

TEST_CASE("cell_curvature equals the finite difference of cell_gradient") {
    for (const auto& spec : {kNormal, kExp, DistributionSpec::gamma(7.0)}) {
        for (double r : {1.5, 2.0, 4.0}) {
            const double fd = oracle::central_diff(
                [&](double t) { return cell_gradient(spec, t, 0.3, 2.2, r); }, 1.0, 1e-5);
            CHECK(cell_curvature(spec, 1.0, 0.3, 2.2, r) == Approx(fd).epsilon(1e-6));
        }
    }
}

TEST_CASE("exponential scaling equivariance") {
    // moment under rate lambda at (a, lo, hi) = lambda^{-r} * moment under rate 1 at lambda*(a, lo, hi)
    for (double lambda : {0.5, 3.0}) {
        for (double r : {1.0, 2.0, 4.0}) {
            const double lhs = cell_moment(DistributionSpec::exponential(lambda), 0.8, 0.3, 2.0, r);
            const double rhs = std::pow(lambda, -r) * cell_moment(kExp, 0.8 * lambda, 0.3 * lambda, 2.0 * lambda, r);
            CHECK(lhs == Approx(rhs).epsilon(1e-11));
        }
    }
}

TEST_CASE("c_fr closed forms") {
    CHECK(c_fr(kExp, 2.0) == Approx(3.0).epsilon(1e-15));
    CHECK(c_fr(kNormal, 2.0) == Approx(3.196101651141631667).epsilon(1e-14));
    CHECK(c_fr(DistributionSpec::gamma(1.0), 2.0) == Approx(3.0).epsilon(1e-14));
    CHECK(c_fr(DistributionSpec::gamma(7.0), 2.0) == Approx(6.0248965507395256969).epsilon(1e-14));
}

TEST_CASE("c_fr agrees with quadrature of f^(1/(1+r))") {
    for (const auto& spec : {kNormal, DistributionSpec::gaussian(1.0, 2.5), kExp,
                             DistributionSpec::exponential(0.3), DistributionSpec::gamma(7.0),
                             DistributionSpec::gamma(2.0, 1.7)}) {
        for (double r : {1.0, 2.0, 4.0}) {
            const double ref = static_cast<double>(cfr_by_simpson(spec, r));
            CHECK_MESSAGE(std::abs(c_fr(spec, r) - ref) / c_fr(spec, r) <= 1e-8, describe(spec), " r=", r);
        }
    }
}

TEST_CASE("Zador constants") {
    CHECK(j_r1(2.0) == Approx(1.0 / 12.0).epsilon(1e-16));
    CHECK(zador_q(kNormal, 2.0) == Approx(2.7206990463513267759).epsilon(1e-14));
    CHECK(zador_q(kExp, 2.0) == Approx(2.25).epsilon(1e-14));
    CHECK(zador_q(kNormal, 1.0) == Approx(1.2533141373155002512).epsilon(1e-14));
    CHECK_THROWS_AS(zador_q(DistributionSpec::gaussian(0, 1, 2), 2.0), UnsupportedDimensionError);
    CHECK_NOTHROW(zador_q(DistributionSpec::gaussian(0, 1, 2), 2.0, 0.08));
}

TEST_CASE("empirical density") {
    // Gaussian: normalized f^{1/3} is N(0, 3)
    for (double x : {-2.0, 0.0, 1.3}) {
        CHECK(empirical_density(kNormal, 2.0, x) ==
              Approx(static_cast<double>(oracle::normal_pdf(x, 0.0L, 3.0L))).epsilon(1e-13));
        CHECK(empirical_density(kExp, 1.0, std::abs(x)) ==
              Approx(static_cast<double>(oracle::exp_pdf(std::abs(x), 0.5L))).epsilon(1e-13));
    }
    CHECK(empirical_density(kExp, 1.0, -1.0) == 0.0);
    CHECK(empirical_density(DistributionSpec::gamma(7.0), 2.0, -0.1) == 0.0);
    CHECK(empirical_measure(DistributionSpec::gamma(7.0), 2.0) == DistributionSpec::gamma(3.0, 1.0 / 3.0));
}

TEST_CASE("empirical density integrates to one") {
    for (const auto& spec : {kNormal, kExp, DistributionSpec::gamma(7.0), DistributionSpec::gamma(0.7, 2.0)}) {
        for (double s : {1.0, 2.0, 4.0}) {
            const auto res = integrate([&](double x) { return empirical_density(spec, s, x); },
                                       spec.support_lo(), INFINITY, QuadratureOpts{}, {}, 10.0);
            CHECK(res.value == Approx(1.0).epsilon(1e-8));
        }
    }
}
