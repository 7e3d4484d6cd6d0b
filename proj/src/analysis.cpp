#include "quantilab/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

#include "quantilab/dilatation.hpp"

namespace quantilab {

namespace {

double parse_double(std::string_view field, std::size_t line_no) {
    double v = 0.0;
    const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || end != field.data() + field.size()) {
        throw std::invalid_argument(
            fmt::format("CSV line {}: cannot parse '{}' as a number", line_no, field));
    }
    return v;
}

double p_mass(const DistributionSpec& spec, double s, double lo, double hi,
              const QuadratureOpts& opts) {
    auto density = [&](double x) { return empirical_density(spec, s, x); };
    lo = std::max(lo, spec.support_lo());
    if (!(hi > lo)) {
        return 0.0;
    }
    return integrate(density, lo, hi, opts, {}, spec.scale()).value;
}

}  // namespace

OlsFit ols_fit(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) {
        throw std::invalid_argument("ols_fit: xs and ys differ in length");
    }
    if (xs.size() < 2) {
        throw std::invalid_argument("ols_fit: need at least two points");
    }
    const auto n = static_cast<double>(xs.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx;
        sxx += dx * dx;
        sxy += dx * (ys[i] - my);
    }
    if (!(sxx > 0.0)) {
        throw std::invalid_argument("ols_fit: covariate values are all identical");
    }
    OlsFit fit;
    fit.a_hat = sxy / sxx;
    fit.b_hat = my - fit.a_hat * mx;
    double sq = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double e = ys[i] - (fit.a_hat * xs[i] + fit.b_hat);
        sq += e * e;
        fit.eps_maxabs = std::max(fit.eps_maxabs, std::abs(e));
    }
    fit.eps_rmse = std::sqrt(sq / n);
    return fit;
}

std::vector<TableRow> table_experiment(const DistributionSpec& spec, double r, double s,
                                       std::span<const int> ns, const TableOpts& opts) {
    spec.validate();
    opts.solver.validate();
    std::vector<int> sorted(ns.begin(), ns.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<TableRow> rows(sorted.size());

    auto work = [&](std::size_t i) {
        TableRow& out = rows[i];
        out.row.n = sorted[i];
        try {
            const Grid xr = solve_grid(spec, sorted[i], r, opts.solver, opts.cache);
            const Grid xs = solve_grid(spec, sorted[i], s, opts.solver, opts.cache);
            if (xr.size() != xs.size()) {
                throw std::runtime_error("grids of different sizes");
            }
            const OlsFit fit = ols_fit(xr.points(), xs.points());
            out.row = {sorted[i], fit.a_hat, fit.b_hat, fit.eps_rmse, fit.eps_maxabs};
            out.ok = true;
        } catch (const std::exception& e) {
            out.ok = false;
            out.error = e.what();
        }
    };

    unsigned threads = opts.threads != 0 ? opts.threads : std::thread::hardware_concurrency();
    threads = std::clamp<unsigned>(threads, 1, static_cast<unsigned>(std::max<std::size_t>(rows.size(), 1)));
    if (threads == 1) {
        for (std::size_t i = 0; i < rows.size(); ++i) {
            work(i);
        }
        return rows;
    }
    // largest n first keeps the pool busy until the end
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t k = next++; k < rows.size(); k = next++) {
                work(rows.size() - 1 - k);
            }
        });
    }
    for (auto& th : pool) {
        th.join();
    }
    return rows;
}

std::vector<int> default_table_ns(bool full) {
    if (full) {
        return {20, 50, 100, 300, 700, 800, 900};
    }
    return {20, 50, 100, 300};
}

EmpiricalCheckReport empirical_discrepancy(const Grid& grid, const DistributionSpec& spec,
                                           double s, int n_bins) {
    if (n_bins < 2) {
        throw std::invalid_argument("empirical_discrepancy: n_bins must be at least 2");
    }
    const DistributionSpec target = empirical_measure(spec, s);
    std::vector<double> edges(static_cast<std::size_t>(n_bins) + 1);
    edges.front() = target.support_lo();
    edges.back() = target.support_hi();
    for (int k = 1; k < n_bins; ++k) {
        const double level = static_cast<double>(k) / n_bins;
        edges[static_cast<std::size_t>(k)] =
            level <= 0.5 ? quantile(target, level) : inverse_survival(target, 1.0 - level);
    }

    EmpiricalCheckReport report;
    report.n = static_cast<int>(grid.size());
    const auto pts = grid.points();
    const auto n = static_cast<double>(pts.size());
    auto count_upto = [&](double x) {
        // points <= x; the first bin also takes everything below the support
        return std::isinf(x) && x > 0 ? pts.size()
                                      : static_cast<std::size_t>(
                                            std::upper_bound(pts.begin(), pts.end(), x) - pts.begin());
    };
    for (int k = 0; k < n_bins; ++k) {
        const double lo = edges[static_cast<std::size_t>(k)];
        const double hi = edges[static_cast<std::size_t>(k) + 1];
        report.partition.emplace_back(lo, hi);
        const std::size_t below = k == 0 ? 0 : count_upto(lo);
        const std::size_t count = count_upto(hi) - below;
        const double mass = interval_mass(target, lo, hi);
        report.max_discrepancy =
            std::max(report.max_discrepancy, std::abs(static_cast<double>(count) / n - mass));
    }
    return report;
}

CounterexampleReport gamma_counterexample() {
    const long double lhs = (185.0L / 128.0L) * std::exp(-3.0L / 8.0L) -
                            (79.0L / 48.0L) * std::exp(-0.5L);
    CounterexampleReport report;
    report.lhs = static_cast<double>(lhs);
    report.rhs = -511.0 / 512.0;
    report.holds = std::abs(report.lhs - report.rhs) < 1e-9;
    return report;
}

IdentityReport empirical_identity_check(const DistributionSpec& spec, double r, double s,
                                        double a, double b, const QuadratureOpts& opts) {
    spec.validate();
    require_one_dimensional(spec);
    opts.validate();
    if (std::isnan(a) || std::isnan(b) || !(a < b)) {
        throw std::invalid_argument("empirical_identity_check: require a < b");
    }
    const double theta = theta_star(spec, r, s);
    const double mu = spec.family == Family::Gaussian ? spec.m : 0.0;
    IdentityReport report;
    report.lhs = p_mass(spec, r, mu + (a - mu) / theta, mu + (b - mu) / theta, opts);
    report.rhs = p_mass(spec, s, a, b, opts);
    report.abs_gap = std::abs(report.lhs - report.rhs);
    const double size = std::max(std::abs(report.lhs), std::abs(report.rhs));
    report.rel_gap = size > 0.0 ? report.abs_gap / size : 0.0;
    return report;
}

std::string to_csv(std::span<const RegressionRow> rows) {
    std::string out = kCsvHeader;
    out += '\n';
    for (const auto& row : rows) {
        out += fmt::format("{},{:.9g},{:.9g},{:.9g},{:.9g}\n", row.n, row.a_hat, row.b_hat,
                           row.eps_rmse, row.eps_maxabs);
    }
    return out;
}

std::vector<RegressionRow> rows_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    std::vector<RegressionRow> rows;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        if (!header_seen) {
            if (line != kCsvHeader) {
                throw std::invalid_argument(fmt::format("CSV: unexpected header '{}'", line));
            }
            header_seen = true;
            continue;
        }
        if (line == kCsvHeader) {
            continue;  // next block of a multi-table listing
        }
        std::vector<std::string_view> fields;
        std::string_view rest(line);
        for (std::size_t comma; (comma = rest.find(',')) != std::string_view::npos;) {
            fields.push_back(rest.substr(0, comma));
            rest.remove_prefix(comma + 1);
        }
        fields.push_back(rest);
        if (fields.size() != 5) {
            throw std::invalid_argument(
                fmt::format("CSV line {}: expected 5 fields, got {}", line_no, fields.size()));
        }
        RegressionRow row;
        const double n = parse_double(fields[0], line_no);
        if (n != std::floor(n) || n < 1 || n > std::numeric_limits<int>::max()) {
            throw std::invalid_argument(fmt::format("CSV line {}: bad n '{}'", line_no, fields[0]));
        }
        row.n = static_cast<int>(n);
        row.a_hat = parse_double(fields[1], line_no);
        row.b_hat = parse_double(fields[2], line_no);
        row.eps_rmse = parse_double(fields[3], line_no);
        row.eps_maxabs = parse_double(fields[4], line_no);
        rows.push_back(row);
    }
    if (!header_seen) {
        throw std::invalid_argument("CSV: missing header");
    }
    return rows;
}

}  // namespace quantilab
