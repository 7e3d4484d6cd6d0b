#pragma once

// Globally adaptive Gauss-Legendre quadrature on a line segment or half-line.
//
// Each panel is integrated with a fixed 12-point rule on the whole panel and on
// its two halves; the difference is the panel's error estimate. The panel with
// the largest estimate is bisected until the total estimate meets tolerance.
// Breakpoints are forced panel boundaries (kinks, support ends). Infinite ends
// are mapped onto [0, 1) with x = c + L t / (1 - t).

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "quantilab/errors.hpp"

namespace quantilab {

struct QuadratureOpts {
    double abs_tol = 1e-14;
    double rel_tol = 1e-12;
    int max_subdivisions = 4000;
    /// Infinite cells get extra breakpoints at the tail_mass_cut and
    /// 1 - tail_mass_cut quantiles so panels concentrate where the mass is.
    double tail_mass_cut = 1e-12;

    void validate() const {
        if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) {
            throw std::invalid_argument("quadrature tolerances must be positive");
        }
        if (max_subdivisions < 1) {
            throw std::invalid_argument("max_subdivisions must be at least 1");
        }
        if (!(tail_mass_cut > 0.0 && tail_mass_cut < 1e-6)) {
            throw std::invalid_argument("tail_mass_cut must lie in (0, 1e-6)");
        }
    }
};

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
    int panels = 0;
};

namespace detail {

struct GaussLegendre12 {
    std::array<double, 12> nodes{};
    std::array<double, 12> weights{};
};

const GaussLegendre12& gauss_legendre_12();

enum class Segment { Finite, RightTail, LeftTail };

struct Panel {
    Segment kind;
    double origin;  // c in the tail map
    double scale;   // L in the tail map
    double a;
    double b;
    double left;    // rule applied to [a, mid]
    double right;   // rule applied to [mid, b]
    double value;   // left + right
    double error;
    double abs_value;
};

template <class F>
inline double mapped(F& f, Segment kind, double origin, double scale, double t) {
    switch (kind) {
        case Segment::Finite:
            return f(t);
        case Segment::RightTail: {
            const double u = 1.0 - t;
            const double x = origin + scale * t / u;
            const double g = f(x);
            return g == 0.0 ? 0.0 : g * scale / (u * u);
        }
        case Segment::LeftTail: {
            const double u = 1.0 - t;
            const double x = origin - scale * t / u;
            const double g = f(x);
            return g == 0.0 ? 0.0 : g * scale / (u * u);
        }
    }
    return 0.0;
}

/// Returns {sum w_i g(x_i), sum w_i |g(x_i)|} on [a, b].
template <class F>
inline std::pair<double, double> apply_rule(F& f, Segment kind, double origin, double scale,
                                            double a, double b) {
    const auto& rule = gauss_legendre_12();
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double sum = 0.0;
    double abs_sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double g = mapped(f, kind, origin, scale, mid + half * rule.nodes[i]);
        sum += rule.weights[i] * g;
        abs_sum += rule.weights[i] * std::abs(g);
    }
    return {sum * half, abs_sum * half};
}

template <class F>
inline Panel make_panel(F& f, Segment kind, double origin, double scale, double a, double b,
                        double whole) {
    const double mid = 0.5 * (a + b);
    const auto [l, labs] = apply_rule(f, kind, origin, scale, a, mid);
    const auto [r, rabs] = apply_rule(f, kind, origin, scale, mid, b);
    Panel p{kind, origin, scale, a, b, l, r, l + r, std::abs(whole - (l + r)), labs + rabs};
    if (!std::isfinite(p.value)) {
        throw QuadratureError("integrand is not finite on a quadrature panel", p.value,
                              std::numeric_limits<double>::infinity());
    }
    return p;
}

}  // namespace detail

/// Integrates f over [lo, hi]; either end may be infinite.
///
/// `tail_scale` sets the length scale of the map used on an infinite end and
/// should be comparable to the integrand's decay length.
template <class F>
QuadratureResult integrate(F&& f, double lo, double hi, const QuadratureOpts& opts,
                           std::span<const double> breakpoints = {}, double tail_scale = 1.0) {
    using detail::Panel;
    using detail::Segment;
    if (std::isnan(lo) || std::isnan(hi) || lo > hi) {
        throw std::invalid_argument("integrate: require lo <= hi");
    }
    if (lo == hi) {
        return {};
    }
    if (!(tail_scale > 0.0) || !std::isfinite(tail_scale)) {
        throw std::invalid_argument("integrate: tail_scale must be positive and finite");
    }

    std::vector<double> knots;
    knots.reserve(breakpoints.size() + 3);
    knots.push_back(lo);
    for (double x : breakpoints) {
        if (std::isfinite(x) && x > lo && x < hi) {
            knots.push_back(x);
        }
    }
    if (std::isinf(lo) && std::isinf(hi) && knots.size() == 1) {
        knots.push_back(0.0);
    }
    knots.push_back(hi);
    std::sort(knots.begin() + 1, knots.end() - 1);
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

    std::vector<Panel> heap;
    auto by_error = [](const Panel& x, const Panel& y) { return x.error < y.error; };
    for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
        const double a = knots[k];
        const double b = knots[k + 1];
        Segment kind = Segment::Finite;
        double origin = 0.0;
        double ta = a;
        double tb = b;
        if (std::isinf(b)) {
            kind = Segment::RightTail;
            origin = a;
            ta = 0.0;
            tb = 1.0;
        } else if (std::isinf(a)) {
            kind = Segment::LeftTail;
            origin = b;
            ta = 0.0;
            tb = 1.0;
        }
        const double whole =
            detail::apply_rule(f, kind, origin, tail_scale, ta, tb).first;
        // Left tails run t: 0 -> 1 as x: origin -> -inf, which is already the
        // orientation of the integral from -inf to origin.
        heap.push_back(detail::make_panel(f, kind, origin, tail_scale, ta, tb, whole));
    }
    std::make_heap(heap.begin(), heap.end(), by_error);

    constexpr double kRoundoff = 50.0 * std::numeric_limits<double>::epsilon();
    auto totals = [&heap]() {
        double v = 0.0;
        double e = 0.0;
        double av = 0.0;
        for (const auto& p : heap) {
            v += p.value;
            e += p.error;
            av += p.abs_value;
        }
        return std::array<double, 3>{v, e, av};
    };

    auto [value, error, abs_value] = totals();
    while (error > std::max({opts.abs_tol, opts.rel_tol * std::abs(value), kRoundoff * abs_value})) {
        if (static_cast<int>(heap.size()) >= opts.max_subdivisions) {
            throw QuadratureError("quadrature did not converge within max_subdivisions", value,
                                  error);
        }
        std::pop_heap(heap.begin(), heap.end(), by_error);
        const Panel worst = heap.back();
        heap.pop_back();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            throw QuadratureError("quadrature panel collapsed below machine resolution", value,
                                  error);
        }
        const Panel lower =
            detail::make_panel(f, worst.kind, worst.origin, worst.scale, worst.a, mid, worst.left);
        const Panel upper =
            detail::make_panel(f, worst.kind, worst.origin, worst.scale, mid, worst.b, worst.right);
        value += lower.value + upper.value - worst.value;
        error += lower.error + upper.error - worst.error;
        abs_value += lower.abs_value + upper.abs_value - worst.abs_value;
        heap.push_back(lower);
        std::push_heap(heap.begin(), heap.end(), by_error);
        heap.push_back(upper);
        std::push_heap(heap.begin(), heap.end(), by_error);
        if (heap.size() % 64 == 0) {
            // running sums drift; resynchronize
            const auto t = totals();
            value = t[0];
            error = t[1];
            abs_value = t[2];
        }
    }
    const auto final_totals = totals();
    return {final_totals[0], final_totals[1], static_cast<int>(heap.size())};
}

}  // namespace quantilab
