#pragma once

// L^r-optimal grids in one dimension.
//
// optimal_grid() seeds the grid at the quantiles of the asymptotic point
// density P_r, runs a few generalized Lloyd sweeps (each point moved to the
// L^r centre of its current Voronoi cell), then solves the stationarity system
// grad D(a) = 0 with Newton's method. Each residual depends only on a point
// and its two neighbours, so the Jacobian is tridiagonal and solved exactly.
//
// For the exponential law the optimum is also known through an implicit
// recursion on the spacings a_k (exp_ak_sequence / exp_optimal_grid), which
// gives an independent route to the same grid.

#include <optional>
#include <vector>

#include "quantilab/distributions.hpp"
#include "quantilab/quantizer.hpp"

namespace quantilab {

enum class SolverInit { EmpiricalQuantiles, UserGrid };

struct SolverOpts {
    int max_lloyd_iters = 5;
    int max_newton_iters = 200;
    /// Sup-norm bound on the stationarity residual (r >= 1).
    double grad_tol = 1e-10;
    /// Bound on the Newton-scaled residual |g_i / J_ii|, relative to the law's
    /// scale. Far-tail cells carry so little mass that the raw residual is tiny
    /// wherever their points sit; this pins those points down.
    double point_tol = 1e-12;
    /// Backtracking factor applied to a Newton step that fails to reduce the residual.
    double step_damping = 0.5;
    SolverInit init = SolverInit::EmpiricalQuantiles;
    std::optional<Grid> user_grid;
    /// Lloyd stops early once no point moves by more than this. For r < 1 it
    /// is also the convergence criterion, since no Newton stage runs.
    double lloyd_move_tol = 1e-6;
    /// Cell integrals in the far tail are themselves ~1e-14, so only a
    /// relative accuracy requirement is meaningful here.
    QuadratureOpts quadrature{.abs_tol = 1e-300};

    void validate() const;
};

struct GridSolution {
    Grid grid;
    /// Sup-norm stationarity residual (r >= 1) or last Lloyd move (r < 1).
    double residual = 0.0;
    int lloyd_iterations = 0;
    int newton_iterations = 0;
    /// False when only stationarity is established (r < 1, or a non-log-concave law).
    bool global_optimum = false;
};

/// Point minimizing the integral of |x - a|^r f over (lo, hi).
/// Throws EmptyCellError when the cell has no probability mass.
double cell_argmin(const DistributionSpec& spec, double lo, double hi, double r,
                   const QuadratureOpts& opts = {});

/// Vector of d/da_i of the distortion at the grid's own Voronoi partition. Requires r >= 1.
std::vector<double> stationarity_residual(const Grid& grid, const DistributionSpec& spec,
                                          double r, const QuadratureOpts& opts = {});

/// L^r-optimal (stationary) n-point grid. Throws ConvergenceError on failure.
GridSolution optimal_grid(const DistributionSpec& spec, int n, double r,
                          const SolverOpts& opts = {});

/// The spacing sequence a_1 > a_2 > ... of the optimal exponential quantizer.
struct AkSequence {
    double r = 0.0;
    std::vector<double> values;  // values[k - 1] = a_k

    [[nodiscard]] double at(int k) const { return values.at(static_cast<std::size_t>(k - 1)); }
};

/// Solves, by bracketed root finding to relative tolerance root_tol,
///   integral_0^{a_1/2} t^{r-1} e^t dt = Gamma(r),
///   integral_0^{a_{k+1}/2} t^{r-1} e^t dt = integral_0^{a_k/2} t^{r-1} e^{-t} dt.
AkSequence exp_ak_sequence(double r, int n, double root_tol = 1e-12);

/// Optimal n-point grid of the exponential law with rate lambda, built from
/// the spacings: the k-th point is a_n / 2 + a_{n-1} + ... + a_{n+1-k}.
Grid exp_optimal_grid(int n, double r, double lambda = 1.0, double root_tol = 1e-12);

}  // namespace quantilab
