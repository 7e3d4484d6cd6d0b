#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "quantilab/distributions.hpp"

namespace quantilab {

/// A one-dimensional codebook: finite, strictly increasing points.
///
/// Construction canonicalizes its input: points are sorted and any point
/// within 1e-12 of its predecessor is dropped. Immutable afterwards.
class Grid {
public:
    static constexpr double kDedupTolerance = 1e-12;

    /// Throws std::invalid_argument if `points` is empty or holds a non-finite value.
    explicit Grid(std::vector<double> points);

    [[nodiscard]] std::span<const double> points() const noexcept { return points_; }
    [[nodiscard]] std::size_t size() const noexcept { return points_.size(); }
    [[nodiscard]] double operator[](std::size_t i) const { return points_[i]; }
    [[nodiscard]] double front() const { return points_.front(); }
    [[nodiscard]] double back() const { return points_.back(); }

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    std::vector<double> points_;
};

/// Parameters of the map a -> mu + theta (a - mu).
struct DilationParams {
    double theta = 1.0;
    double mu = 0.0;

    void validate() const;
};

/// Cell boundaries [-inf, midpoints..., +inf]; size n + 1.
std::vector<double> voronoi_bounds(const Grid& grid);

/// Index of the closest point; exact midpoint ties go to the lower index.
std::size_t nearest(const Grid& grid, double x);

/// The r-th power quantization error: integral of min_a |x - a|^r dP.
double distortion(const Grid& grid, const DistributionSpec& spec, double r,
                  const QuadratureOpts& opts = {});

Grid dilate(const Grid& grid, const DilationParams& params);

/// Number of grid points in the closed interval [lo, hi].
std::size_t count_in_interval(const Grid& grid, double lo, double hi);

// Serialization. Text form: one point per line, 17 significant digits.
// JSON form: a flat array of numbers. Both round-trip exactly.
std::string to_text(const Grid& grid);
Grid grid_from_text(const std::string& text);
std::string to_json(const Grid& grid);
Grid grid_from_json(const std::string& text);

}  // namespace quantilab
