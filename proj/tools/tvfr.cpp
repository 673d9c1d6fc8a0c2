// tvfr: fit, cross-validate, jump-targeted selection and the simulation matrix.
//
// Exit codes: 0 success, 2 bad input or usage, 3 a numerical routine failed to converge
// (a partial result is still written), 1 anything else. Every failure prints a single line
// "error[<kind>]: <message>" on stderr.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <variant>

#include <CLI11.hpp>

#include "tvfr/euclidean.hpp"
#include "tvfr/io.hpp"
#include "tvfr/sim.hpp"
#include "tvfr/solver.hpp"
#include "tvfr/spd.hpp"
#include "tvfr/wasserstein.hpp"

namespace fs = std::filesystem;
using namespace tvfr;

namespace {

struct Common {
    std::string space;
    std::string input;
    std::string output;
    std::string fitted_csv;
    std::size_t grid = 0;  // 0: quantile mode infers G; sample mode uses the default
    double scale = 1.0;
    double step_scale = 0.0;
    int max_cycles = 500;
    double rel_tol = 1e-8;
    double merge_tol = 1e-3;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--space", c.space, "euclidean | spd-ai | spd-le | wasserstein")
        ->required()
        ->check(CLI::IsMember({"euclidean", "spd-ai", "spd-le", "wasserstein"}));
    cmd->add_option("--input", c.input, "CSV file (or, for wasserstein, a directory of sample files)")->required();
    cmd->add_option("--output", c.output, "JSON result document")->required();
    cmd->add_option("--fitted-csv", c.fitted_csv, "also write fitted values in the input CSV format");
    cmd->add_option("--quantile-grid", c.grid, "wasserstein grid size G");
    cmd->add_option("--scale", c.scale, "multiply every input value by this constant");
    cmd->add_option("--step-scale", c.step_scale, "alpha_0 of the step schedule alpha_0/r (<= 0: data-driven default)");
    cmd->add_option("--max-cycles", c.max_cycles, "cycle cap")->check(CLI::PositiveNumber);
    cmd->add_option("--rel-tol", c.rel_tol, "relative objective change over 10 cycles that stops the solver")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--merge-tol", c.merge_tol, "jump threshold relative to the median adjacent data distance")
        ->check(CLI::NonNegativeNumber);
}

SolverConfig solver_config(const Common& c) {
    SolverConfig cfg;
    cfg.step_scale = c.step_scale;
    cfg.max_cycles = c.max_cycles;
    cfg.rel_tol = c.rel_tol;
    cfg.jump_merge_tol = c.merge_tol;
    return cfg;
}

// Loads the input for the chosen space and hands (space, series) to `run`.
template <class Run>
void with_data(const Common& c, Run&& run) {
    if (!(c.scale > 0.0) || !std::isfinite(c.scale)) throw InvalidInput("--scale must be a positive finite number");
    if (c.space == "euclidean") {
        run(EuclideanSpace{}, TimeSeries<VecPoint>(read_euclidean_csv(c.input, c.scale)));
    } else if (c.space == "spd-ai") {
        run(SpdAffineInvariant{}, TimeSeries<SpdPoint>(read_spd_csv(c.input, c.scale)));
    } else if (c.space == "spd-le") {
        run(SpdLogEuclidean{}, TimeSeries<SpdPoint>(read_spd_csv(c.input, c.scale)));
    } else {
        std::vector<QuantilePoint> pts =
            fs::is_directory(c.input) ? read_sample_dir(c.input, c.grid ? c.grid : kDefaultQuantileGrid, c.scale)
                                      : read_quantile_csv(c.input, c.grid, c.scale);
        const Wasserstein2 space(pts.front().grid_size());
        for (const auto& p : pts) space.validate(p);
        run(space, TimeSeries<QuantilePoint>(std::move(pts)));
    }
}

template <class P>
void write_fit_outputs(const Common& c, const FitResult<P>& res, std::span<const double> design,
                       nlohmann::json extra = nlohmann::json::object()) {
    nlohmann::json doc = fit_to_json(res, c.space, design);
    doc["kind"] = extra.value("kind", "fit");
    for (const auto& [k, v] : extra.items()) doc[k] = v;
    write_json(c.output, doc);
    if (!c.fitted_csv.empty()) write_points_csv(c.fitted_csv, res.fitted);
}

// A ConvergenceFailure escaping a fit carries the iterate it stopped at; write it out.
void write_partial(const Common& c, const ConvergenceFailure& e) {
    nlohmann::json doc = {{"schema_version", kSchemaVersion},
                          {"kind", "partial"},
                          {"space", c.space},
                          {"error", {{"kind", e.kind()}, {"message", e.what()}}}};
    nlohmann::json fitted = nlohmann::json::array();
    if (auto* v = e.last_iterate<std::vector<VecPoint>>())
        for (const auto& p : *v) fitted.push_back(vectorize(p));
    else if (auto* m = e.last_iterate<std::vector<SpdPoint>>())
        for (const auto& p : *m) fitted.push_back(vectorize(p));
    else if (auto* q = e.last_iterate<std::vector<QuantilePoint>>())
        for (const auto& p : *q) fitted.push_back(vectorize(p));
    doc["fitted"] = std::move(fitted);
    write_json(c.output, doc);
}

std::vector<double> parse_lambda_grid(const std::string& spec) {
    // lo:hi:count:log  or  lo:hi:count:lin
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const auto colon = spec.find(':', start);
        parts.push_back(spec.substr(start, colon == std::string::npos ? std::string::npos : colon - start));
        if (colon == std::string::npos) break;
        start = colon + 1;
    }
    if (parts.size() != 4 || (parts[3] != "log" && parts[3] != "lin"))
        throw InvalidInput("--lambda-grid must look like lo:hi:count:log or lo:hi:count:lin, got '" + spec + "'");
    LambdaGrid g;
    try {
        std::size_t used = 0;
        g.lo = std::stod(parts[0], &used);
        if (used != parts[0].size()) throw std::invalid_argument("lo");
        g.hi = std::stod(parts[1], &used);
        if (used != parts[1].size()) throw std::invalid_argument("hi");
        g.count = std::stoi(parts[2], &used);
        if (used != parts[2].size()) throw std::invalid_argument("count");
    } catch (const std::logic_error&) {
        throw InvalidInput("--lambda-grid: cannot parse '" + spec + "'");
    }
    g.log_spaced = parts[3] == "log";
    g.relative = false;
    return lambda_values(g);
}

std::pair<double, double> parse_range(const std::string& spec) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos) throw InvalidInput("--lambda-range must look like LO:HI");
    try {
        std::size_t u1 = 0, u2 = 0;
        const std::string a = spec.substr(0, colon), b = spec.substr(colon + 1);
        const double lo = std::stod(a, &u1), hi = std::stod(b, &u2);
        if (u1 != a.size() || u2 != b.size()) throw std::invalid_argument("range");
        return {lo, hi};
    } catch (const std::logic_error&) {
        throw InvalidInput("--lambda-range: cannot parse '" + spec + "'");
    }
}

unsigned default_threads() {
    if (const char* env = std::getenv("TVFR_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1) return unsigned(v);
        throw InvalidInput("TVFR_THREADS must be a positive integer");
    }
    return 1;
}

int fail(const char* kind, const std::string& msg, int code) {
    std::string line = msg;
    for (char& ch : line)
        if (ch == '\n' || ch == '\r') ch = ' ';
    std::cerr << "error[" << kind << "]: " << line << '\n';
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Total-variation regularized Fréchet regression"};
    app.require_subcommand(1);

    Common fit_opts;
    double fit_lambda = 0.0;
    auto* fit_cmd = app.add_subcommand("fit", "fit at a fixed lambda");
    add_common(fit_cmd, fit_opts);
    fit_cmd->add_option("--lambda", fit_lambda, "regularization parameter")->required()->check(CLI::NonNegativeNumber);

    Common cv_opts;
    std::string grid_spec = "0.001:1:20:log";
    int folds = 5;
    std::uint64_t seed = 1;
    unsigned cv_threads = 0;
    auto* cv_cmd = app.add_subcommand("cv", "choose lambda by K-fold cross-validation, then fit");
    add_common(cv_cmd, cv_opts);
    cv_cmd->add_option("--lambda-grid", grid_spec, "lo:hi:count:log|lin");
    cv_cmd->add_option("--folds", folds, "number of folds")->check(CLI::Range(2, 1000000));
    cv_cmd->add_option("--seed", seed, "fold assignment seed");
    cv_cmd->add_option("--threads", cv_threads, "worker threads (default: TVFR_THREADS or 1)");

    Common jump_opts;
    std::size_t target = 0;
    std::string range_spec;
    double rel_width = 0.01;
    auto* jump_cmd = app.add_subcommand("jumps", "smallest lambda whose fit has a given number of jumps");
    add_common(jump_cmd, jump_opts);
    jump_cmd->add_option("--target-jumps", target, "desired jump count")->required();
    jump_cmd->add_option("--lambda-range", range_spec, "LO:HI bracket")->required();
    jump_cmd->add_option("--rel-width", rel_width, "stop bisecting once HI/LO <= 1 + this")->check(CLI::PositiveNumber);

    std::string config_path, out_dir;
    unsigned sim_threads = 0;
    auto* sim_cmd = app.add_subcommand("simulate", "run a Monte-Carlo experiment from a JSON config");
    sim_cmd->add_option("--config", config_path, "experiment config (JSON)")->required();
    sim_cmd->add_option("--output", out_dir, "output directory")->required();
    sim_cmd->add_option("--parallel", sim_threads, "worker threads (default: TVFR_THREADS or config)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("usage", e.what(), 2);
    }

    const Common* active = nullptr;
    try {
        if (*fit_cmd) {
            active = &fit_opts;
            with_data(fit_opts, [&](const auto& space, const auto& series) {
                SolverConfig cfg = solver_config(fit_opts);
                cfg.lambda = fit_lambda;
                const auto res = fit(space, series, cfg);
                write_fit_outputs(fit_opts, res, series.design());
            });
        } else if (*cv_cmd) {
            active = &cv_opts;
            const auto lambdas = parse_lambda_grid(grid_spec);
            const unsigned threads = cv_threads ? cv_threads : default_threads();
            with_data(cv_opts, [&](const auto& space, const auto& series) {
                const SolverConfig base = solver_config(cv_opts);
                const CvResult cv = cross_validate(space, series, lambdas, base, folds, seed, threads);
                SolverConfig cfg = base;
                cfg.lambda = cv.best_lambda;
                const auto res = fit(space, series, cfg);
                write_fit_outputs(cv_opts, res, series.design(),
                                  {{"kind", "cv"}, {"cv", cv_to_json(cv, folds, seed)}});
            });
        } else if (*jump_cmd) {
            active = &jump_opts;
            const auto [lo, hi] = parse_range(range_spec);
            with_data(jump_opts, [&](const auto& space, const auto& series) {
                const auto sel = select_lambda_by_jumps(space, series, target, lo, hi, solver_config(jump_opts), rel_width);
                write_fit_outputs(jump_opts, sel.fit, series.design(),
                                  {{"kind", "jumps"},
                                   {"target_jumps", target},
                                   {"achieved_jumps", sel.achieved},
                                   {"exact", sel.exact},
                                   {"monotonicity_violated", sel.monotonicity_violated},
                                   {"fits_run", sel.fits_run},
                                   {"lambda_range", {lo, hi}}});
                if (!sel.exact)
                    std::cerr << "warning: no lambda in range gives exactly " << target << " jumps; closest has "
                              << sel.achieved << '\n';
            });
        } else if (*sim_cmd) {
            SimConfig cfg = read_sim_config(config_path);
            if (sim_threads) cfg.threads = sim_threads;
            else if (std::getenv("TVFR_THREADS")) cfg.threads = default_threads();
            const auto t0 = std::chrono::steady_clock::now();
            const SimReport report = run_experiment(cfg);
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            fs::create_directories(out_dir);
            write_json(fs::path(out_dir) / "report.json", sim_report_to_json(report));
            write_replicates_csv(fs::path(out_dir) / "replicates.csv", report);
            std::cout << summary_line(report) << '\n';
            std::cerr << "elapsed " << secs << " s\n";
        }
    } catch (const ConvergenceFailure& e) {
        if (active) {
            try {
                write_partial(*active, e);
            } catch (const Error& w) {
                return fail(w.kind(), std::string(e.what()) + "; partial result not written: " + w.what(), 3);
            }
        }
        return fail(e.kind(), e.what(), 3);
    } catch (const Error& e) {
        return fail(e.kind(), e.what(), 2);
    } catch (const fs::filesystem_error& e) {
        return fail("io", e.what(), 2);
    } catch (const std::exception& e) {
        return fail("internal", e.what(), 1);
    }
    return 0;
}
