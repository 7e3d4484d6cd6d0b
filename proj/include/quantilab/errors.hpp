#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace quantilab {

/// Adaptive quadrature hit its subdivision budget before reaching tolerance.
class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, double estimate, double error_bound)
        : std::runtime_error(what), estimate_(estimate), error_bound_(error_bound) {}

    [[nodiscard]] double estimate() const noexcept { return estimate_; }
    [[nodiscard]] double error_bound() const noexcept { return error_bound_; }

private:
    double estimate_;
    double error_bound_;
};

/// Iterative solver ran out of iterations. Carries the best iterate seen.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, std::vector<double> best_points, double residual)
        : std::runtime_error(what), best_points_(std::move(best_points)), residual_(residual) {}

    [[nodiscard]] const std::vector<double>& best_points() const noexcept { return best_points_; }
    [[nodiscard]] double residual() const noexcept { return residual_; }

private:
    std::vector<double> best_points_;
    double residual_;
};

/// A cell carries no probability mass, so it has no optimal representative.
class EmptyCellError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operation needs a quantity (J_{r,d}, a grid solver) that is only built in for d = 1.
class UnsupportedDimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Parameters fall outside the range where a closed form or rate result applies.
class AdmissibilityError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace quantilab
