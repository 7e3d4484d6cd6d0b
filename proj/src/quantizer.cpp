#include "quantilab/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>
#include <json.hpp>

namespace quantilab {

Grid::Grid(std::vector<double> points) : points_(std::move(points)) {
    if (points_.empty()) {
        throw std::invalid_argument("a grid needs at least one point");
    }
    for (double p : points_) {
        if (!std::isfinite(p)) {
            throw std::invalid_argument("grid points must be finite");
        }
    }
    std::sort(points_.begin(), points_.end());
    auto last = std::unique(points_.begin(), points_.end(), [](double lhs, double rhs) {
        return std::abs(rhs - lhs) <= kDedupTolerance;
    });
    points_.erase(last, points_.end());
}

void DilationParams::validate() const {
    if (!(theta > 0.0) || !std::isfinite(theta)) {
        throw std::invalid_argument(fmt::format("theta must be positive and finite, got {}", theta));
    }
    if (!std::isfinite(mu)) {
        throw std::invalid_argument("mu must be finite");
    }
}

std::vector<double> voronoi_bounds(const Grid& grid) {
    const auto pts = grid.points();
    std::vector<double> bounds(pts.size() + 1);
    bounds.front() = -std::numeric_limits<double>::infinity();
    bounds.back() = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < pts.size(); ++i) {
        bounds[i] = 0.5 * (pts[i - 1] + pts[i]);
    }
    return bounds;
}

std::size_t nearest(const Grid& grid, double x) {
    const auto pts = grid.points();
    const auto it = std::lower_bound(pts.begin(), pts.end(), x);
    if (it == pts.begin()) {
        return 0;
    }
    if (it == pts.end()) {
        return pts.size() - 1;
    }
    const auto hi = static_cast<std::size_t>(it - pts.begin());
    const auto lo = hi - 1;
    // ties (equal distance) resolve to the lower index
    return (x - pts[lo]) <= (pts[hi] - x) ? lo : hi;
}

double distortion(const Grid& grid, const DistributionSpec& spec, double r,
                  const QuadratureOpts& opts) {
    require_one_dimensional(spec);
    opts.validate();
    const auto bounds = voronoi_bounds(grid);
    double total = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        total += cell_moment(spec, grid[i], bounds[i], bounds[i + 1], r, opts);
    }
    return total;
}

Grid dilate(const Grid& grid, const DilationParams& params) {
    params.validate();
    if (params.theta == 1.0) {
        return grid;  // mu + (a - mu) need not round back to a
    }
    std::vector<double> out;
    out.reserve(grid.size());
    for (double a : grid.points()) {
        out.push_back(params.mu + params.theta * (a - params.mu));
    }
    return Grid(std::move(out));
}

std::size_t count_in_interval(const Grid& grid, double lo, double hi) {
    if (std::isnan(lo) || std::isnan(hi) || lo > hi) {
        throw std::invalid_argument("count_in_interval: require lo <= hi");
    }
    const auto pts = grid.points();
    const auto first = std::lower_bound(pts.begin(), pts.end(), lo);
    const auto last = std::upper_bound(first, pts.end(), hi);
    return static_cast<std::size_t>(last - first);
}

std::string to_text(const Grid& grid) {
    std::string out;
    for (double p : grid.points()) {
        out += fmt::format("{:.17g}\n", p);
    }
    return out;
}

Grid grid_from_text(const std::string& text) {
    std::istringstream in(text);
    std::vector<double> pts;
    std::string line;
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') {
            continue;
        }
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(line.substr(first), &used);
        } catch (const std::exception&) {
            throw std::invalid_argument(fmt::format("bad grid line: '{}'", line));
        }
        if (line.find_first_not_of(" \t\r", first + used) != std::string::npos) {
            throw std::invalid_argument(fmt::format("bad grid line: '{}'", line));
        }
        pts.push_back(v);
    }
    return Grid(std::move(pts));
}

std::string to_json(const Grid& grid) {
    // nlohmann prints doubles with round-trip precision
    return nlohmann::json(std::vector<double>(grid.points().begin(), grid.points().end())).dump();
}

Grid grid_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(fmt::format("bad grid JSON: {}", e.what()));
    }
    if (!j.is_array()) {
        throw std::invalid_argument("grid JSON must be an array of numbers");
    }
    std::vector<double> pts;
    for (const auto& v : j) {
        if (!v.is_number()) {
            throw std::invalid_argument("grid JSON must be an array of numbers");
        }
        pts.push_back(v.get<double>());
    }
    return Grid(std::move(pts));
}

}  // namespace quantilab
