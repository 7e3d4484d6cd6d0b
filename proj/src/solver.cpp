#include "quantilab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <fmt/format.h>

#include "density.hpp"
#include "quantilab/errors.hpp"

namespace quantilab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Bracket tolerance for toms748: absolute floor on the distribution's length scale plus
// a few ulps relative.
struct BracketTolerance {
    double floor;
    bool operator()(double a, double b) const {
        return std::abs(b - a) <= floor + 4.0 * std::numeric_limits<double>::epsilon() *
                                              std::max(std::abs(a), std::abs(b));
    }
};

template <class F>
double solve_bracketed(F&& fn, double a, double b, double fa, double fb, BracketTolerance tol) {
    if (fa == 0.0) {
        return a;
    }
    if (fb == 0.0) {
        return b;
    }
    std::uintmax_t max_iter = 200;
    const auto [x0, x1] = boost::math::tools::toms748_solve(fn, a, b, fa, fb, tol, max_iter);
    return 0.5 * (x0 + x1);
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) {
        m = std::max(m, std::abs(x));
    }
    return m;
}

// Thomas algorithm for a symmetric tridiagonal system. off[i] couples i and i+1.
// Returns false if a pivot is not positive.
bool solve_tridiagonal(const std::vector<double>& diag, const std::vector<double>& off,
                       std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    std::vector<double> c(n, 0.0);
    double pivot = diag[0];
    if (!(pivot > 0.0)) {
        return false;
    }
    if (n > 1) {
        c[0] = off[0] / pivot;
    }
    rhs[0] /= pivot;
    for (std::size_t i = 1; i < n; ++i) {
        pivot = diag[i] - off[i - 1] * c[i - 1];
        if (!(pivot > 0.0)) {
            return false;
        }
        if (i + 1 < n) {
            c[i] = off[i] / pivot;
        }
        rhs[i] = (rhs[i] - off[i - 1] * rhs[i - 1]) / pivot;
    }
    for (std::size_t i = n - 1; i-- > 0;) {
        rhs[i] -= c[i] * rhs[i + 1];
    }
    return true;
}

bool admissible_points(const std::vector<double>& pts, const DistributionSpec& spec) {
    if (!(pts.front() > spec.support_lo())) {
        return false;
    }
    for (std::size_t i = 1; i < pts.size(); ++i) {
        if (!(pts[i] > pts[i - 1]) || !std::isfinite(pts[i])) {
            return false;
        }
    }
    return std::isfinite(pts.front());
}

std::vector<double> midpoints(const std::vector<double>& pts) {
    std::vector<double> b(pts.size() + 1);
    b.front() = -kInf;
    b.back() = kInf;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        b[i] = 0.5 * (pts[i - 1] + pts[i]);
    }
    return b;
}

std::vector<double> residual_of(const std::vector<double>& pts, const DistributionSpec& spec,
                                double r, const QuadratureOpts& q) {
    const auto b = midpoints(pts);
    std::vector<double> g(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        g[i] = cell_gradient(spec, pts[i], b[i], b[i + 1], r, q);
    }
    return g;
}

// Generalized Lloyd sweep: every point moves to the L^r centre of its cell.
// Returns the largest move.
double lloyd_sweep(std::vector<double>& pts, const DistributionSpec& spec, double r,
                   const QuadratureOpts& q) {
    const auto b = midpoints(pts);
    double moved = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double next = cell_argmin(spec, b[i], b[i + 1], r, q);
        moved = std::max(moved, std::abs(next - pts[i]));
        pts[i] = next;
    }
    return moved;
}

struct NewtonSystem {
    std::vector<double> diag;
    std::vector<double> off;
};

NewtonSystem jacobian(const std::vector<double>& pts, const DistributionSpec& spec, double r,
                      const QuadratureOpts& q) {
    const std::size_t n = pts.size();
    const auto b = midpoints(pts);
    const detail::Density f(spec);
    NewtonSystem sys{std::vector<double>(n), std::vector<double>(n > 0 ? n - 1 : 0)};
    // Moving a point drags its two shared boundaries at half speed; each moving
    // boundary changes both neighbouring cell integrals.
    std::vector<double> boundary_term(n + 1, 0.0);
    for (std::size_t i = 1; i < n; ++i) {
        const double half_gap = 0.5 * (pts[i] - pts[i - 1]);
        boundary_term[i] = 0.5 * r * detail::abs_pow(half_gap, r - 1.0) * f(b[i]);
    }
    for (std::size_t i = 0; i < n; ++i) {
        sys.diag[i] = cell_curvature(spec, pts[i], b[i], b[i + 1], r, q) - boundary_term[i] -
                      boundary_term[i + 1];
        if (i + 1 < n) {
            sys.off[i] = -boundary_term[i + 1];
        }
    }
    return sys;
}

std::vector<double> initial_points(const DistributionSpec& spec, int n, double r,
                                   const SolverOpts& opts) {
    if (opts.init == SolverInit::UserGrid) {
        if (!opts.user_grid || opts.user_grid->size() != static_cast<std::size_t>(n)) {
            throw std::invalid_argument("UserGrid initialization needs a user grid with n points");
        }
        const auto pts = opts.user_grid->points();
        return {pts.begin(), pts.end()};
    }
    const DistributionSpec target = empirical_measure(spec, r);
    std::vector<double> pts(static_cast<std::size_t>(n));
    for (int k = 1; k <= n; ++k) {
        const double level = (2.0 * k - 1.0) / (2.0 * n);
        pts[static_cast<std::size_t>(k - 1)] =
            level <= 0.5 ? quantile(target, level) : inverse_survival(target, 1.0 - level);
    }
    return pts;
}

}  // namespace

void SolverOpts::validate() const {
    if (max_lloyd_iters < 0 || max_newton_iters < 0) {
        throw std::invalid_argument("iteration limits must be non-negative");
    }
    if (!(grad_tol > 0.0) || !(point_tol > 0.0) || !(lloyd_move_tol > 0.0)) {
        throw std::invalid_argument("solver tolerances must be positive");
    }
    if (!(step_damping > 0.0 && step_damping <= 1.0)) {
        throw std::invalid_argument("step_damping must lie in (0, 1]");
    }
    quadrature.validate();
}

double cell_argmin(const DistributionSpec& spec, double lo, double hi, double r,
                   const QuadratureOpts& opts) {
    require_one_dimensional(spec);
    if (!(r > 0.0)) {
        throw std::invalid_argument("r must be positive");
    }
    if (std::isnan(lo) || std::isnan(hi) || lo >= hi) {
        throw std::invalid_argument("cell_argmin: require lo < hi");
    }
    lo = std::max(lo, spec.support_lo());
    hi = std::min(hi, spec.support_hi());
    if (lo >= hi || !(interval_mass(spec, lo, hi) > 0.0)) {
        throw EmptyCellError(fmt::format("cell ({}, {}) carries no probability mass", lo, hi));
    }

    if (r == 1.0) {
        // conditional median, solved on whichever side keeps full precision
        const double lower = cdf(spec, lo);
        const double upper = cdf(spec, hi);
        const double mid_level = 0.5 * (lower + upper);
        if (mid_level < 0.5) {
            return std::clamp(quantile(spec, mid_level), lo, hi);
        }
        const double mid_tail = 0.5 * (survival(spec, lo) + survival(spec, hi));
        return std::clamp(inverse_survival(spec, mid_tail), lo, hi);
    }

    const double scale = spec.scale();
    const BracketTolerance tol{1e-15 * scale};

    // Finite bracket [left, right]: an infinite end is replaced by a point
    // stepping outward until the objective's slope has the right sign.
    auto slope = [&](double a) {
        if (r > 1.0) {
            return cell_gradient(spec, a, lo, hi, r, opts);
        }
        const double h = 1e-7 * scale;
        return (cell_moment(spec, a + h, lo, hi, r, opts) -
                cell_moment(spec, a - h, lo, hi, r, opts)) /
               (2.0 * h);
    };
    double left = lo;
    double right = hi;
    if (std::isinf(left) && std::isinf(right)) {
        left = spec.mode() - scale;
        right = spec.mode() + scale;
    } else if (std::isinf(left)) {
        left = right - scale;
    } else if (std::isinf(right)) {
        right = left + scale;
    }
    if (std::isinf(lo)) {
        for (double step = scale; slope(left) > 0.0; step *= 2.0) {
            right = std::min(right, left);
            left -= step;
        }
    }
    if (std::isinf(hi)) {
        for (double step = scale; slope(right) < 0.0; step *= 2.0) {
            left = std::max(left, right);
            right += step;
        }
    }

    if (r > 1.0) {
        auto g = [&](double a) { return cell_gradient(spec, a, lo, hi, r, opts); };
        return solve_bracketed(g, left, right, g(left), g(right), tol);
    }
    // r < 1: the objective is not differentiable at points of mass concentration
    // in general; use derivative-free Brent (golden section + parabolic) minimization.
    auto moment = [&](double a) { return cell_moment(spec, a, lo, hi, r, opts); };
    std::uintmax_t max_iter = 500;
    return boost::math::tools::brent_find_minima(moment, left, right, 40, max_iter).first;
}

std::vector<double> stationarity_residual(const Grid& grid, const DistributionSpec& spec,
                                          double r, const QuadratureOpts& opts) {
    require_one_dimensional(spec);
    const auto pts = grid.points();
    return residual_of(std::vector<double>(pts.begin(), pts.end()), spec, r, opts);
}

GridSolution optimal_grid(const DistributionSpec& spec, int n, double r, const SolverOpts& opts) {
    require_one_dimensional(spec);
    opts.validate();
    if (n < 1) {
        throw std::invalid_argument("n must be at least 1");
    }
    if (!(r > 0.0) || !std::isfinite(r)) {
        throw std::invalid_argument("r must be positive and finite");
    }
    const QuadratureOpts& q = opts.quadrature;
    std::vector<double> pts = initial_points(spec, n, r, opts);
    if (!admissible_points(pts, spec)) {
        throw std::invalid_argument("initial grid must be strictly increasing inside the support");
    }

    GridSolution out{Grid(pts), kInf, 0, 0, spec.log_concave() && r >= 1.0};

    int lloyd = 0;
    double moved = kInf;
    const int lloyd_budget = r >= 1.0 ? opts.max_lloyd_iters : std::max(opts.max_lloyd_iters, 1000);
    while (lloyd < lloyd_budget && moved > opts.lloyd_move_tol) {
        moved = lloyd_sweep(pts, spec, r, q);
        ++lloyd;
    }
    out.lloyd_iterations = lloyd;

    if (r < 1.0) {
        if (moved > opts.lloyd_move_tol) {
            throw ConvergenceError(
                fmt::format("Lloyd iteration did not settle (last move {})", moved), pts, moved);
        }
        out.grid = Grid(pts);
        out.residual = moved;
        return out;
    }

    // Newton on the stationarity system. Progress is measured by the
    // Jacobi-scaled residual max |g_i / J_ii|, an estimate of how far each point
    // is from its stationary position; in the tails the raw g_i is tiny whatever
    // the point's position.
    std::vector<double> g = residual_of(pts, spec, r, q);
    NewtonSystem sys = jacobian(pts, spec, r, q);
    auto scaled = [&sys](const std::vector<double>& gv) {
        double m = 0.0;
        for (std::size_t i = 0; i < gv.size(); ++i) {
            const double dii = std::abs(sys.diag[i]);
            m = std::max(m, dii > 0.0 ? std::abs(gv[i]) / dii : kInf);
        }
        return m;
    };
    const double point_floor = opts.point_tol * spec.scale();
    // Below this the scaled residual is dominated by quadrature roundoff.
    const double roundoff_floor = 1e3 * point_floor;
    double res = max_abs(g);
    double merit = scaled(g);
    bool converged = false;
    int iter = 0;
    auto refresh = [&] {
        g = residual_of(pts, spec, r, q);
        sys = jacobian(pts, spec, r, q);
        res = max_abs(g);
        merit = scaled(g);
    };
    for (; iter < opts.max_newton_iters; ++iter) {
        if (res <= opts.grad_tol && merit <= point_floor) {
            converged = true;
            break;
        }
        std::vector<double> step(g.size());
        std::transform(g.begin(), g.end(), step.begin(), [](double v) { return -v; });
        if (!solve_tridiagonal(sys.diag, sys.off, step)) {
            // not locally convex; fall back to a Lloyd sweep
            lloyd_sweep(pts, spec, r, q);
            ++out.lloyd_iterations;
            refresh();
            continue;
        }
        double t = 1.0;
        bool accepted = false;
        std::vector<double> trial(pts.size());
        for (int backtrack = 0; backtrack < 60; ++backtrack) {
            for (std::size_t i = 0; i < pts.size(); ++i) {
                trial[i] = pts[i] + t * step[i];
            }
            if (admissible_points(trial, spec)) {
                const auto trial_g = residual_of(trial, spec, r, q);
                if (scaled(trial_g) < merit || opts.step_damping == 1.0) {
                    accepted = true;
                    break;
                }
            }
            t *= opts.step_damping < 1.0 ? opts.step_damping : 0.5;
        }
        if (!accepted) {
            if (res <= opts.grad_tol && merit <= roundoff_floor) {
                converged = true;
                break;
            }
            lloyd_sweep(pts, spec, r, q);
            ++out.lloyd_iterations;
            refresh();
            continue;
        }
        pts = trial;
        refresh();
    }
    out.newton_iterations = iter;
    if (!converged && res <= opts.grad_tol && merit <= roundoff_floor) {
        converged = true;
    }
    if (!converged) {
        throw ConvergenceError(
            fmt::format("Newton did not converge: residual {} (grad_tol {}), scaled residual {}",
                        res, opts.grad_tol, merit),
            pts, res);
    }
    out.grid = Grid(pts);
    out.residual = res;
    return out;
}

AkSequence exp_ak_sequence(double r, int n, double root_tol) {
    if (!(r > 0.0) || !std::isfinite(r)) {
        throw std::invalid_argument("r must be positive and finite");
    }
    if (n < 1) {
        throw std::invalid_argument("n must be at least 1");
    }
    if (!(root_tol > 0.0)) {
        throw std::invalid_argument("root_tol must be positive");
    }

    // integral_0^y t^{r-1} e^t dt = y^r sum_k y^k / (k! (r + k))
    auto rising = [r](double y) {
        if (y <= 0.0) {
            return 0.0;
        }
        double term = 1.0;
        double sum = 1.0 / r;
        for (int k = 1; k < 1000; ++k) {
            term *= y / k;
            const double add = term / (r + k);
            sum += add;
            if (add < 1e-17 * sum) {
                break;
            }
        }
        return std::pow(y, r) * sum;
    };

    AkSequence seq{r, {}};
    seq.values.reserve(static_cast<std::size_t>(n));
    double target = boost::math::tgamma(r);  // a_0 = +inf
    for (int k = 1; k <= n; ++k) {
        auto fn = [&](double y) { return rising(y) - target; };
        double hi = std::pow(r * target, 1.0 / r);  // small-y inversion
        if (!(hi > 0.0) || !std::isfinite(hi)) {
            throw std::runtime_error(fmt::format("a_k bracket failure at k = {} for r = {}", k, r));
        }
        double lo = 0.0;
        double fhi = fn(hi);
        int expansions = 0;
        while (fhi < 0.0) {
            lo = hi;
            hi *= 2.0;
            fhi = fn(hi);
            if (++expansions > 200 || !std::isfinite(fhi)) {
                throw std::runtime_error(
                    fmt::format("a_k bracket failure at k = {} for r = {}", k, r));
            }
        }
        const double flo = fn(lo);
        auto tol = [root_tol](double x0, double x1) {
            return std::abs(x1 - x0) <= root_tol * std::max(std::abs(x0), std::abs(x1));
        };
        std::uintmax_t max_iter = 300;
        double y = 0.0;
        if (fhi == 0.0) {
            y = hi;
        } else {
            const auto [y0, y1] = boost::math::tools::toms748_solve(fn, lo, hi, flo, fhi, tol, max_iter);
            y = 0.5 * (y0 + y1);
        }
        const double ak = 2.0 * y;
        if (!seq.values.empty() && !(ak < seq.values.back())) {
            throw std::runtime_error(
                fmt::format("a_k sequence failed to decrease at k = {} for r = {}", k, r));
        }
        seq.values.push_back(ak);
        // lower incomplete gamma gamma(r, a_k / 2), unnormalized
        target = boost::math::tgamma_lower(r, y);
    }
    return seq;
}

Grid exp_optimal_grid(int n, double r, double lambda, double root_tol) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw std::invalid_argument("lambda must be positive and finite");
    }
    const AkSequence seq = exp_ak_sequence(r, n, root_tol);
    std::vector<double> pts(static_cast<std::size_t>(n));
    double x = 0.5 * seq.at(n);
    pts[0] = x;
    for (int k = 1; k < n; ++k) {
        x += seq.at(n - k);
        pts[static_cast<std::size_t>(k)] = x;
    }
    for (double& p : pts) {
        p /= lambda;
    }
    return Grid(std::move(pts));
}

}  // namespace quantilab
