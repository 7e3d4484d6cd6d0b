#include "quantilab/grid_cache.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <system_error>
#include <thread>

#include <fmt/format.h>

namespace quantilab {

namespace {

std::string params_key(const DistributionSpec& spec) {
    switch (spec.family) {
        case Family::Gaussian:
            return fmt::format("m{:.17g}_v{:.17g}", spec.m, spec.sigma2);
        case Family::Exponential:
            return fmt::format("l{:.17g}", spec.lambda);
        case Family::Gamma:
            return fmt::format("a{:.17g}_l{:.17g}", spec.a, spec.lambda);
    }
    return "unknown";
}

}  // namespace

GridCache::GridCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::optional<GridCache> GridCache::from_env() {
    const char* dir = std::getenv("QUANTILAB_CACHE_DIR");
    if (dir == nullptr || *dir == '\0') {
        return std::nullopt;
    }
    return GridCache(dir);
}

std::filesystem::path GridCache::path_for(const DistributionSpec& spec, int n, double r,
                                          double grad_tol) const {
    return dir_ / fmt::format("{}_{}_n{}_r{:.17g}_tol{:.17g}.grid", to_string(spec.family),
                              params_key(spec), n, r, grad_tol);
}

std::optional<Grid> GridCache::load(const DistributionSpec& spec, int n, double r,
                                    double grad_tol) const {
    std::ifstream in(path_for(spec, n, r, grad_tol));
    if (!in) {
        return std::nullopt;
    }
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        Grid grid = grid_from_text(buf.str());
        if (grid.size() != static_cast<std::size_t>(n)) {
            return std::nullopt;
        }
        return grid;
    } catch (const std::invalid_argument&) {
        return std::nullopt;
    }
}

void GridCache::store(const DistributionSpec& spec, int n, double r, double grad_tol,
                      const Grid& grid) const {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    const auto target = path_for(spec, n, r, grad_tol);
    auto tmp = target;
    tmp += fmt::format(".tmp{}", std::hash<std::thread::id>{}(std::this_thread::get_id()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            return;  // a read-only cache only costs recomputation
        }
        out << to_text(grid);
        if (!out) {
            std::filesystem::remove(tmp, ec);
            return;
        }
    }
    std::filesystem::rename(tmp, target, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
    }
}

Grid solve_grid(const DistributionSpec& spec, int n, double r, const SolverOpts& opts,
                const GridCache* cache) {
    const bool cacheable = cache != nullptr && opts.init == SolverInit::EmpiricalQuantiles;
    if (cacheable) {
        if (auto hit = cache->load(spec, n, r, opts.grad_tol)) {
            return *std::move(hit);
        }
    }
    Grid grid = optimal_grid(spec, n, r, opts).grid;
    if (cacheable) {
        cache->store(spec, n, r, opts.grad_tol, grid);
    }
    return grid;
}

}  // namespace quantilab
