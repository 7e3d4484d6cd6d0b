#pragma once

// Numerical experiments on optimal grids: regression of an L^s-optimal grid on
// an L^r-optimal one, empirical-measure checks, and the Gamma counterexample.

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "quantilab/distributions.hpp"
#include "quantilab/grid_cache.hpp"
#include "quantilab/quantizer.hpp"
#include "quantilab/solver.hpp"

namespace quantilab {

struct OlsFit {
    double a_hat = 0.0;
    double b_hat = 0.0;
    double eps_rmse = 0.0;
    double eps_maxabs = 0.0;
};

/// Least squares fit ys ~ a_hat xs + b_hat with residual statistics.
/// Throws std::invalid_argument on mismatched lengths, fewer than 2 points or constant xs.
OlsFit ols_fit(std::span<const double> xs, std::span<const double> ys);

struct RegressionRow {
    int n = 0;
    double a_hat = 0.0;
    double b_hat = 0.0;
    double eps_rmse = 0.0;
    double eps_maxabs = 0.0;

    friend bool operator==(const RegressionRow&, const RegressionRow&) = default;
};

struct TableRow {
    RegressionRow row;
    bool ok = false;
    std::string error;  // set when !ok
};

struct TableOpts {
    SolverOpts solver;
    const GridCache* cache = nullptr;
    /// Worker threads; 0 means one per hardware thread.
    unsigned threads = 0;
};

/// For each n: solve the L^r and L^s optimal grids, pair points by index and
/// regress the L^s grid (response) on the L^r grid (covariate). Rows come back
/// sorted by n; a failed n yields a row with ok = false rather than an exception.
std::vector<TableRow> table_experiment(const DistributionSpec& spec, double r, double s,
                                       std::span<const int> ns, const TableOpts& opts = {});

/// n values of the published experiments.
std::vector<int> default_table_ns(bool full);

struct EmpiricalCheckReport {
    int n = 0;
    std::vector<std::pair<double, double>> partition;
    double max_discrepancy = 0.0;
};

/// Splits the line into n_bins equiprobable intervals of P_s (the law with
/// density proportional to f^{1/(1+s)}) and reports sup |count/n - P_s(bin)|.
/// Bins are half-open (lo, hi], the first one closed on the left.
EmpiricalCheckReport empirical_discrepancy(const Grid& grid, const DistributionSpec& spec,
                                           double s, int n_bins);

struct CounterexampleReport {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
};

/// The Gamma(7, 1), r = 2, s = 1 evaluation at u = 1:
/// lhs = (185/128) e^{-3/8} - (79/48) e^{-1/2} against the claimed value -511/512.
CounterexampleReport gamma_counterexample();

struct IdentityReport {
    double lhs = 0.0;  // P_r of the interval pulled back by theta*
    double rhs = 0.0;  // P_s of the interval
    double abs_gap = 0.0;
    /// abs_gap / max(|lhs|, |rhs|); meaningful when both sides are tiny.
    double rel_gap = 0.0;
};

/// Compares P_r([mu + (a - mu)/theta*, mu + (b - mu)/theta*]) with P_s([a, b]),
/// both by quadrature of the normalized f^{1/(1+r)} and f^{1/(1+s)}.
IdentityReport empirical_identity_check(const DistributionSpec& spec, double r, double s,
                                        double a, double b, const QuadratureOpts& opts = {});

// CSV: header n,a_hat,b_hat,eps_rmse,eps_maxabs; 9 significant digits; LF endings.
inline constexpr const char* kCsvHeader = "n,a_hat,b_hat,eps_rmse,eps_maxabs";
std::string to_csv(std::span<const RegressionRow> rows);
std::vector<RegressionRow> rows_from_csv(const std::string& text);

}  // namespace quantilab
