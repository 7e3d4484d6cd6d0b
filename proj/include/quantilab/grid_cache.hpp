#pragma once

// On-disk store of solved grids, keyed by (family, parameters, n, r, grad_tol).
// Files use the text grid format, so a cached grid round-trips bit-exactly and
// results do not depend on whether the cache was warm.

#include <filesystem>
#include <optional>
#include <string>

#include "quantilab/distributions.hpp"
#include "quantilab/quantizer.hpp"
#include "quantilab/solver.hpp"

namespace quantilab {

class GridCache {
public:
    explicit GridCache(std::filesystem::path dir);

    /// Cache rooted at $QUANTILAB_CACHE_DIR, or nothing when the variable is unset or empty.
    static std::optional<GridCache> from_env();

    [[nodiscard]] const std::filesystem::path& dir() const noexcept { return dir_; }
    [[nodiscard]] std::filesystem::path path_for(const DistributionSpec& spec, int n, double r,
                                                 double grad_tol) const;

    /// Missing or unreadable entries yield nothing.
    [[nodiscard]] std::optional<Grid> load(const DistributionSpec& spec, int n, double r,
                                           double grad_tol) const;
    /// Written to a temporary file and renamed into place.
    void store(const DistributionSpec& spec, int n, double r, double grad_tol,
               const Grid& grid) const;

private:
    std::filesystem::path dir_;
};

/// optimal_grid() behind an optional cache. Only quantile-seeded solves are cached.
Grid solve_grid(const DistributionSpec& spec, int n, double r, const SolverOpts& opts,
                const GridCache* cache);

}  // namespace quantilab
