#include "quantilab/cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "quantilab/analysis.hpp"
#include "quantilab/dilatation.hpp"
#include "quantilab/errors.hpp"
#include "quantilab/grid_cache.hpp"
#include "quantilab/quantizer.hpp"
#include "quantilab/solver.hpp"

namespace quantilab::cli {

namespace {

// Thrown for flag combinations CLI11 cannot express; reported like a parse error.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Config {
    std::string dist = "gaussian";
    double m = 0.0;
    double sigma2 = 1.0;
    double lambda = 1.0;
    double a = 1.0;
    int d = 1;

    int n = 0;
    double r = 2.0;
    std::optional<double> s;
    std::vector<double> s_list{1.0, 4.0};
    std::optional<double> theta;
    std::optional<double> mu;
    std::optional<double> j_const;
    std::optional<double> j_const_r;
    double grad_tol = 1e-10;
    std::string input;
    std::string output;
    std::string format;
    bool full_tables = false;
    std::vector<int> ns;
    int bins = 10;
    std::optional<double> lo;
    std::optional<double> hi;
};

std::string num(double v) { return fmt::format("{:.9g}", v); }

DistributionSpec make_spec(const Config& c) {
    DistributionSpec spec;
    try {
        spec.family = parse_family(c.dist);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    spec.m = c.m;
    spec.sigma2 = c.sigma2;
    spec.lambda = c.lambda;
    spec.a = c.a;
    spec.d = c.d;
    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    return spec;
}

void add_dist(CLI::App* sub, Config& c) {
    sub->add_option("--dist", c.dist, "gaussian | exponential | gamma")
        ->check(CLI::IsMember({"gaussian", "normal", "exponential", "gamma"}))
        ->capture_default_str();
    sub->add_option("--m", c.m, "Gaussian mean")->capture_default_str();
    sub->add_option("--sigma2", c.sigma2, "Gaussian variance")->capture_default_str();
    sub->add_option("--lambda", c.lambda, "exponential / Gamma rate")->capture_default_str();
    sub->add_option("--a", c.a, "Gamma shape")->capture_default_str();
    sub->add_option("--d", c.d, "dimension (constants only)")->capture_default_str();
}

void add_output(CLI::App* sub, Config& c, std::vector<std::string> formats, std::string def) {
    c.format = def;
    sub->add_option("--format", c.format)->check(CLI::IsMember(formats))->capture_default_str();
    sub->add_option("-o,--output", c.output, "write to this file instead of stdout");
}

SolverOpts solver_opts(const Config& c) {
    SolverOpts o;
    o.grad_tol = c.grad_tol;
    return o;
}

Grid load_grid(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw UsageError(fmt::format("cannot read grid file '{}'", path));
    }
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    const auto first = text.find_first_not_of(" \t\r\n");
    try {
        if (first != std::string::npos && text[first] == '[') {
            return grid_from_json(text);
        }
        return grid_from_text(text);
    } catch (const std::invalid_argument& e) {
        throw UsageError(fmt::format("grid file '{}': {}", path, e.what()));
    }
}

std::string render_grid(const Grid& grid, const std::string& format) {
    return format == "json" ? to_json(grid) + "\n" : to_text(grid);
}

// The grid a command works on: read from --input, else solved for (--n, --r).
Grid source_grid(const Config& c, const DistributionSpec& spec) {
    if (!c.input.empty()) {
        return load_grid(c.input);
    }
    if (c.n < 1) {
        throw UsageError("either --input or --n >= 1 is required");
    }
    require_one_dimensional(spec);
    const auto cache = GridCache::from_env();
    return solve_grid(spec, c.n, c.r, solver_opts(c), cache ? &*cache : nullptr);
}

std::string cmd_grid(const Config& c) {
    const auto spec = make_spec(c);
    if (c.n < 1) {
        throw UsageError("--n must be at least 1");
    }
    return render_grid(source_grid(c, spec), c.format);
}

std::string cmd_exp_grid(const Config& c) {
    if (c.n < 1) {
        throw UsageError("--n must be at least 1");
    }
    if (!(c.lambda > 0.0)) {
        throw UsageError("--lambda must be positive");
    }
    return render_grid(exp_optimal_grid(c.n, c.r, c.lambda), c.format);
}

std::string cmd_dilate(const Config& c) {
    const auto spec = make_spec(c);
    double theta = 0.0;
    if (c.theta) {
        theta = *c.theta;
    } else if (c.s) {
        theta = theta_star(spec, c.r, *c.s);
    } else {
        throw UsageError("dilate needs --theta or --s (to use theta*)");
    }
    const double mu = c.mu.value_or(spec.family == Family::Gaussian ? spec.m : 0.0);
    const DilationParams params{theta, mu};
    try {
        params.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    return render_grid(dilate(source_grid(c, spec), params), c.format);
}

std::string cmd_distortion(const Config& c) {
    const auto spec = make_spec(c);
    const Grid grid = source_grid(c, spec);
    // --s picks the error exponent when it differs from the grid's design exponent
    const double exponent = c.s.value_or(c.r);
    return num(distortion(grid, spec, exponent)) + "\n";
}

std::string cmd_theta_star(const Config& c) {
    const auto spec = make_spec(c);
    if (!c.s) {
        throw UsageError("--s is required");
    }
    return num(theta_star(spec, c.r, *c.s)) + "\n";
}

std::string cmd_constants(const Config& c) {
    const auto spec = make_spec(c);
    if (!c.s) {
        throw UsageError("--s is required");
    }
    RateQuery q{spec, c.r, *c.s, 0.0, c.mu, c.j_const, c.j_const_r};
    q.theta = c.theta ? *c.theta : theta_star(spec, c.r, *c.s);
    const RateConstants k = rate_constants(q);
    const double theta_min = admissible_theta_range(spec, c.r, *c.s).theta_min;
    if (c.format == "json") {
        nlohmann::ordered_json j;
        j["c_fr"] = k.c_fr;
        j["q_r"] = k.q_r;
        j["q_s"] = k.q_s;
        j["theta_star"] = k.theta_star;
        j["theta"] = q.theta;
        j["theta_min"] = theta_min;
        j["theta_admissible"] = k.theta_admissible;
        j["boundary_case"] = k.boundary_case;
        // JSON has no infinity; divergent constants become null
        auto finite_or_null = [](double v) {
            return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json();
        };
        j["condition_integral"] = finite_or_null(k.condition_integral);
        j["q_inf"] = finite_or_null(k.q_inf);
        j["q_sup_sub"] = k.q_sup_sub ? finite_or_null(*k.q_sup_sub) : nlohmann::ordered_json("n/a");
        return j.dump(2) + "\n";
    }
    std::string out;
    out += fmt::format("c_fr {}\n", num(k.c_fr));
    out += fmt::format("q_r {}\n", num(k.q_r));
    out += fmt::format("q_s {}\n", num(k.q_s));
    out += fmt::format("theta_star {}\n", num(k.theta_star));
    out += fmt::format("theta {}\n", num(q.theta));
    out += fmt::format("theta_min {}\n", num(theta_min));
    out += fmt::format("theta_admissible {}\n", k.theta_admissible ? "yes" : "no");
    out += fmt::format("boundary_case {}\n", k.boundary_case ? "yes" : "no");
    out += fmt::format("condition_integral {}\n", num(k.condition_integral));
    out += fmt::format("q_inf {}\n", num(k.q_inf));
    out += fmt::format("q_sup_sub {}\n", k.q_sup_sub ? num(*k.q_sup_sub) : "n/a");
    return out;
}

// Residual sum of squares; the epsilon column of the published tables.
double eps_ssr(const RegressionRow& row) { return row.n * row.eps_rmse * row.eps_rmse; }

struct TableRun {
    std::string text;
    bool all_ok = true;
};

TableRun cmd_table(const Config& c, const DistributionSpec& spec) {
    const std::vector<int> ns = c.ns.empty() ? default_table_ns(c.full_tables) : c.ns;
    const auto cache = GridCache::from_env();
    TableOpts opts;
    opts.solver = solver_opts(c);
    opts.cache = cache ? &*cache : nullptr;

    TableRun run;
    nlohmann::ordered_json blocks = nlohmann::ordered_json::array();
    bool first = true;
    for (double s : c.s_list) {
        const auto rows = table_experiment(spec, c.r, s, ns, opts);
        std::vector<RegressionRow> good;
        for (const auto& row : rows) {
            if (row.ok) {
                good.push_back(row.row);
            } else {
                run.all_ok = false;
            }
        }
        if (c.format == "csv") {
            run.text += first ? "" : "\n";
            run.text += to_csv(good);
        } else if (c.format == "json") {
            nlohmann::ordered_json block;
            block["r"] = c.r;
            block["s"] = s;
            block["theta_star"] = theta_star(spec, c.r, s);
            block["rows"] = nlohmann::ordered_json::array();
            for (const auto& row : rows) {
                nlohmann::ordered_json j;
                j["n"] = row.row.n;
                if (row.ok) {
                    j["a_hat"] = row.row.a_hat;
                    j["b_hat"] = row.row.b_hat;
                    j["eps_rmse"] = row.row.eps_rmse;
                    j["eps_maxabs"] = row.row.eps_maxabs;
                    j["eps_ssr"] = eps_ssr(row.row);
                } else {
                    j["error"] = row.error;
                }
                block["rows"].push_back(j);
            }
            blocks.push_back(block);
        } else {
            run.text += first ? "" : "\n";
            run.text += fmt::format("{}: response L^{} grid, covariate L^{} grid, theta* = {}\n",
                                    describe(spec), num(s), num(c.r),
                                    num(theta_star(spec, c.r, s)));
            run.text += fmt::format("{:>5}  {:>14}  {:>14}  {:>14}  {:>14}  {:>14}\n", "n",
                                    "a_hat", "b_hat", "eps_rmse", "eps_maxabs", "eps_ssr");
            for (const auto& row : rows) {
                if (row.ok) {
                    run.text += fmt::format(
                        "{:>5}  {:>14.9g}  {:>14.9g}  {:>14.9g}  {:>14.9g}  {:>14.9g}\n", row.row.n,
                        row.row.a_hat, row.row.b_hat, row.row.eps_rmse, row.row.eps_maxabs,
                        eps_ssr(row.row));
                } else {
                    run.text += fmt::format("{:>5}  failed: {}\n", row.row.n, row.error);
                }
            }
        }
        first = false;
    }
    if (c.format == "json") {
        run.text = blocks.dump(2) + "\n";
    }
    return run;
}

std::string cmd_empirical_check(const Config& c) {
    const auto spec = make_spec(c);
    const double s = c.s.value_or(1.0);
    if (c.lo.has_value() != c.hi.has_value()) {
        throw UsageError("--lo and --hi go together");
    }
    std::string out;
    if (c.lo) {
        const auto rep = empirical_identity_check(spec, c.r, s, *c.lo, *c.hi);
        out += fmt::format("lhs {}\nrhs {}\nabs_gap {}\nrel_gap {}\n", num(rep.lhs), num(rep.rhs),
                           num(rep.abs_gap), num(rep.rel_gap));
        return out;
    }
    Config solve = c;
    if (solve.n < 1 && solve.input.empty()) {
        solve.n = 500;
    }
    const double theta = c.theta.value_or(theta_star(spec, c.r, s));
    const double mu = c.mu.value_or(spec.family == Family::Gaussian ? spec.m : 0.0);
    const Grid grid = dilate(source_grid(solve, spec), DilationParams{theta, mu});
    const auto rep = empirical_discrepancy(grid, spec, s, c.bins);
    out += fmt::format("n {}\ntheta {}\nbins {}\nmax_discrepancy {}\n", rep.n, num(theta),
                       c.bins, num(rep.max_discrepancy));
    return out;
}

std::string cmd_counterexample() {
    const auto rep = gamma_counterexample();
    return fmt::format("lhs {}\nrhs {}\nidentity violated: {}\n", num(rep.lhs), num(rep.rhs),
                       rep.holds ? "no" : "yes");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Optimal quantization grids, dilatation constants and experiments", "quantilab"};
    app.require_subcommand(1);
    Config c;

    auto* grid = app.add_subcommand("grid", "L^r-optimal grid by Lloyd + Newton");
    add_dist(grid, c);
    grid->add_option("--n", c.n, "number of points")->required();
    grid->add_option("--r", c.r, "error exponent")->capture_default_str();
    grid->add_option("--grad-tol", c.grad_tol)->capture_default_str();
    add_output(grid, c, {"text", "json"}, "text");

    auto* exp_grid = app.add_subcommand("exp-grid", "exponential grid from the spacing recursion");
    exp_grid->add_option("--n", c.n, "number of points")->required();
    exp_grid->add_option("--r", c.r, "error exponent")->capture_default_str();
    exp_grid->add_option("--lambda", c.lambda, "rate")->capture_default_str();
    add_output(exp_grid, c, {"text", "json"}, "text");

    auto* dil = app.add_subcommand("dilate", "map a grid by a -> mu + theta (a - mu)");
    add_dist(dil, c);
    dil->add_option("--input", c.input, "grid file (text or JSON); default: solve --n, --r");
    dil->add_option("--n", c.n);
    dil->add_option("--r", c.r)->capture_default_str();
    dil->add_option("--s", c.s, "target exponent; theta defaults to theta*(r, s)");
    dil->add_option("--theta", c.theta);
    dil->add_option("--mu", c.mu);
    dil->add_option("--grad-tol", c.grad_tol)->capture_default_str();
    add_output(dil, c, {"text", "json"}, "text");

    auto* dist = app.add_subcommand("distortion", "r-th power quantization error of a grid");
    add_dist(dist, c);
    dist->add_option("--input", c.input, "grid file (text or JSON); default: solve --n, --r");
    dist->add_option("--n", c.n);
    dist->add_option("--r", c.r)->capture_default_str();
    dist->add_option("--s", c.s, "error exponent if different from --r");
    dist->add_option("--grad-tol", c.grad_tol)->capture_default_str();
    dist->add_option("-o,--output", c.output);

    auto* ts = app.add_subcommand("theta-star", "optimal scaling number");
    add_dist(ts, c);
    ts->add_option("--r", c.r)->capture_default_str();
    ts->add_option("--s", c.s)->required();
    ts->add_option("-o,--output", c.output);

    auto* consts = app.add_subcommand("constants", "Zador and dilatation rate constants");
    add_dist(consts, c);
    consts->add_option("--r", c.r)->capture_default_str();
    consts->add_option("--s", c.s)->required();
    consts->add_option("--theta", c.theta, "default theta*");
    consts->add_option("--mu", c.mu, "Gaussian only; default m");
    consts->add_option("--j-const", c.j_const, "J_{s,d}, required for d >= 2");
    consts->add_option("--j-const-r", c.j_const_r, "J_{r,d}, required for d >= 2");
    add_output(consts, c, {"text", "json"}, "text");

    auto add_table = [&](const char* name, const char* help) {
        auto* t = app.add_subcommand(name, help);
        t->add_option("--r", c.r)->capture_default_str();
        t->add_option("--s", c.s_list, "response exponents")->capture_default_str();
        t->add_option("--n", c.ns, "override the list of n");
        t->add_flag("--full-tables", c.full_tables, "all rows up to n = 900");
        t->add_option("--grad-tol", c.grad_tol)->capture_default_str();
        add_output(t, c, {"csv", "json", "text"}, "csv");
        return t;
    };
    auto* t1 = add_table("table1", "regression table, Gaussian(0, 1)");
    auto* t2 = add_table("table2", "regression table, Exponential(1)");

    auto* emp = app.add_subcommand("empirical-check", "empirical measure of a dilated grid");
    add_dist(emp, c);
    emp->add_option("--input", c.input, "grid file; default: solve --n (500), --r");
    emp->add_option("--n", c.n);
    emp->add_option("--r", c.r)->capture_default_str();
    emp->add_option("--s", c.s, "target exponent (default 1)");
    emp->add_option("--theta", c.theta, "default theta*");
    emp->add_option("--mu", c.mu);
    emp->add_option("--bins", c.bins)->check(CLI::Range(2, 1000000))->capture_default_str();
    emp->add_option("--lo", c.lo, "with --hi: compare the two empirical measures on [lo, hi]");
    emp->add_option("--hi", c.hi);
    emp->add_option("--grad-tol", c.grad_tol)->capture_default_str();
    emp->add_option("-o,--output", c.output);

    auto* cex = app.add_subcommand("counterexample", "Gamma(7, 1) evaluation, r = 2, s = 1");
    cex->add_option("-o,--output", c.output);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, err, err);
        return kExitUsage;
    }

    std::string result;
    int code = kExitOk;
    try {
        if (!(c.grad_tol > 0.0)) {
            throw UsageError("--grad-tol must be positive");
        }
        if (!(c.r > 0.0) || (c.s && !(*c.s > 0.0))) {
            throw UsageError("--r and --s must be positive");
        }
        if (*grid) {
            result = cmd_grid(c);
        } else if (*exp_grid) {
            result = cmd_exp_grid(c);
        } else if (*dil) {
            result = cmd_dilate(c);
        } else if (*dist) {
            result = cmd_distortion(c);
        } else if (*ts) {
            result = cmd_theta_star(c);
        } else if (*consts) {
            result = cmd_constants(c);
        } else if (*t1 || *t2) {
            Config tc = c;
            tc.dist = *t1 ? "gaussian" : "exponential";
            for (double s : tc.s_list) {
                if (!(s > 0.0)) {
                    throw UsageError("--s values must be positive");
                }
            }
            for (int n : tc.ns) {
                if (n < 2) {
                    throw UsageError("table rows need n >= 2");
                }
            }
            const auto run = cmd_table(tc, make_spec(tc));
            result = run.text;
            if (!run.all_ok) {
                err << "some rows failed to solve\n";
                code = kExitNumeric;
            }
        } else if (*emp) {
            result = cmd_empirical_check(c);
        } else if (*cex) {
            result = cmd_counterexample();
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        // includes admissibility and unsupported-dimension errors
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    }

    if (c.output.empty()) {
        out << result;
    } else {
        std::ofstream file(c.output, std::ios::binary | std::ios::trunc);
        file << result;
        if (!file) {
            err << "error: cannot write '" << c.output << "'\n";
            return kExitNumeric;
        }
    }
    out.flush();
    return code;
}

}  // namespace quantilab::cli
