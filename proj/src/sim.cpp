#include "tvfr/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "tvfr/parallel.hpp"

namespace tvfr {

std::string_view to_string(Setting s) { return s == Setting::I ? "I" : "II"; }

std::string_view to_string(SimSpace s) { return s == SimSpace::Spd ? "spd" : "wasserstein"; }

Setting parse_setting(std::string_view s) {
    if (s == "I" || s == "1") return Setting::I;
    if (s == "II" || s == "2") return Setting::II;
    throw InvalidInput("unknown setting '" + std::string(s) + "' (expected I or II)");
}

SimSpace parse_sim_space(std::string_view s) {
    if (s == "spd" || s == "spd-ai") return SimSpace::Spd;
    if (s == "wasserstein") return SimSpace::Wasserstein;
    throw InvalidInput("unsupported simulation space '" + std::string(s) + "'");
}

double phi(double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw InvalidInput("phi: t outside [0,1]");
    if (t < 0.5) return 2.0 / (1.0 + std::exp(-40.0 * (t - 0.25)));
    return 2.0 / (1.0 + std::exp(40.0 * (t - 0.75)));
}

int third_of(double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw InvalidInput("mean function evaluated outside [0,1]");
    if (t < 1.0 / 3.0) return 0;
    if (t < 2.0 / 3.0) return 1;
    return 2;
}

SpdPoint SpdMeanFunction::operator()(double t) const {
    const double c = setting == Setting::I ? double(third_of(t) + 1) : 1.0 + phi(t);
    return c * SpdPoint::Identity(3, 3);
}

QuantilePoint WassMeanFunction::operator()(double t) const {
    if (setting == Setting::I) {
        static constexpr double mean[] = {0.0, 1.0, 2.0};
        static constexpr double sd[] = {1.0, 1.5, 2.0};
        const int k = third_of(t);
        return space.gaussian(mean[k], sd[k]);
    }
    const double p = phi(t);
    return space.gaussian(p, 1.0 + p);
}

MeanFunction mean_function(std::string_view space, Setting setting, std::size_t quantile_grid) {
    switch (parse_sim_space(space)) {
        case SimSpace::Spd: return SpdMeanFunction{setting};
        case SimSpace::Wasserstein: return WassMeanFunction{setting, Wasserstein2(quantile_grid)};
    }
    throw InvalidInput("unsupported simulation space");
}

SpdPoint gen_spd(const SpdPoint& mu, CounterRng& rng, double noise_sd) {
    if (mu.rows() != 3 || mu.cols() != 3) throw InvalidInput("gen_spd: mean must be 3x3");
    SpdPoint s(3, 3);
    for (Eigen::Index j = 0; j < 3; ++j)
        for (Eigen::Index i = j; i < 3; ++i) s(i, j) = s(j, i) = noise_sd * standard_normal(rng);
    const Eigen::MatrixXd half = spd_sqrt(mu);
    const Eigen::MatrixXd inv_half = spd_inv_sqrt(mu);
    const Eigen::MatrixXd inner = inv_half * s * inv_half;
    const Eigen::MatrixXd y = half * spd_exp(0.5 * (inner + inner.transpose())) * half;
    return 0.5 * (y + y.transpose());
}

WassNoise draw_wass_noise(const Moments& base, CounterRng& rng) {
    if (!(base.sd > 0.0)) throw InvalidInput("gen_wass: base distribution is degenerate (sd = 0)");
    static constexpr int ks[] = {-2, -1, 1, 2};
    WassNoise w;
    w.nu = base.mean + standard_normal(rng);
    w.sigma = gamma_draw(rng, 0.5 * base.sd * base.sd, 0.5 * base.sd);
    w.k = ks[std::min<std::uint64_t>(std::uint64_t(rng.uniform() * 4.0), 3)];
    return w;
}

QuantilePoint gen_wass(const Wasserstein2& space, const QuantilePoint& mu, CounterRng& rng) {
    if (mu.grid_size() != space.grid_size()) throw InvalidInput("gen_wass: grid mismatch");
    const WassNoise w = draw_wass_noise(quantile_moments(mu), rng);
    return pushforward(space.gaussian(w.nu, w.sigma), TransportMap(w.k));
}

std::vector<double> rise_nodes(std::size_t grid) {
    if (grid == 0) throw InvalidInput("rise: empty evaluation grid");
    std::vector<double> t(grid);
    for (std::size_t k = 0; k < grid; ++k) t[k] = (double(k) + 0.5) / double(grid);
    return t;
}

std::vector<double> lambda_values(const LambdaGrid& grid, double scale) {
    if (grid.count < 1) throw InvalidInput("lambda grid: count must be positive");
    if (!(grid.lo >= 0.0) || !(grid.hi >= grid.lo)) throw InvalidInput("lambda grid: need 0 <= lo <= hi");
    if (grid.log_spaced && !(grid.lo > 0.0)) throw InvalidInput("lambda grid: log spacing needs lo > 0");
    std::vector<double> out(std::size_t(grid.count));
    for (int i = 0; i < grid.count; ++i) {
        const double f = grid.count == 1 ? 0.0 : double(i) / double(grid.count - 1);
        const double v = grid.log_spaced ? std::exp(std::log(grid.lo) + f * (std::log(grid.hi) - std::log(grid.lo)))
                                         : grid.lo + f * (grid.hi - grid.lo);
        out[std::size_t(i)] = v * scale;
    }
    out.front() = grid.lo * scale;
    if (grid.count > 1) out.back() = grid.hi * scale;
    return out;
}

void validate(const SimConfig& cfg) {
    if (cfg.n < 2) throw InvalidInput("simulation: n must be at least 2");
    if (cfg.replicates < 1) throw InvalidInput("simulation: replicates must be >= 1");
    if (cfg.folds < 2 || std::size_t(cfg.folds) > cfg.n) throw InvalidInput("simulation: folds must be in [2, n]");
    if (cfg.quantile_grid < 1) throw InvalidInput("simulation: quantile grid must be positive");
    if (cfg.rise_grid < 1) throw InvalidInput("simulation: rise grid must be positive");
    (void)lambda_values(cfg.lambda_grid);
}

TimeSeries<SpdPoint> simulate_spd_series(Setting setting, std::size_t n, std::uint64_t seed) {
    const SpdMeanFunction mu{setting};
    CounterRng rng(seed);
    auto t = equally_spaced_design(n);
    std::vector<SpdPoint> y;
    y.reserve(n);
    for (double ti : t) y.push_back(gen_spd(mu(ti), rng));
    return TimeSeries<SpdPoint>(std::move(t), std::move(y));
}

TimeSeries<QuantilePoint> simulate_wass_series(const Wasserstein2& space, Setting setting, std::size_t n,
                                               std::uint64_t seed) {
    const WassMeanFunction mu{setting, space};
    CounterRng rng(seed);
    auto t = equally_spaced_design(n);
    std::vector<QuantilePoint> y;
    y.reserve(n);
    for (double ti : t) y.push_back(gen_wass(space, mu(ti), rng));
    return TimeSeries<QuantilePoint>(std::move(t), std::move(y));
}

namespace {

template <MetricSpace S, class Truth, class Generate>
std::vector<ReplicateResult> replicate_all(const S& space, const Truth& truth, const SimConfig& cfg,
                                           Generate generate) {
    using P = typename S::Point;
    std::vector<P> truth_values;
    for (double t : rise_nodes(cfg.rise_grid)) truth_values.push_back(truth(t));

    std::vector<ReplicateResult> out(std::size_t(cfg.replicates));
    parallel_for(out.size(), cfg.threads, [&](std::size_t r) {
        const std::uint64_t seed = derive_seed(cfg.seed, r);
        const TimeSeries<P> series = generate(derive_seed(seed, 0));
        const double scale = cfg.lambda_grid.relative
                                 ? median_adjacent_distance(space, std::span<const P>(series.observations()))
                                 : 1.0;
        const auto lambdas = lambda_values(cfg.lambda_grid, scale);
        const CvResult cv = cross_validate(space, series, lambdas, cfg.solver, cfg.folds, derive_seed(seed, 1));
        SolverConfig final_cfg = cfg.solver;
        final_cfg.lambda = cv.best_lambda;
        const auto res = fit(space, series, final_cfg);
        out[r] = ReplicateResult{int(r), seed, cv.best_lambda,
                                 rise(space, res.step, std::span<const P>(truth_values)), res.jumps.size(),
                                 res.cycles_run};
    });
    return out;
}

}  // namespace

SimReport run_experiment(const SimConfig& cfg) {
    validate(cfg);
    SimReport rep;
    rep.config = cfg;
    if (cfg.space == SimSpace::Spd) {
        rep.replicates = replicate_all(SpdAffineInvariant{}, SpdMeanFunction{cfg.setting}, cfg,
                                       [&](std::uint64_t s) { return simulate_spd_series(cfg.setting, cfg.n, s); });
    } else {
        const Wasserstein2 space(cfg.quantile_grid);
        rep.replicates = replicate_all(space, WassMeanFunction{cfg.setting, space}, cfg, [&](std::uint64_t s) {
            return simulate_wass_series(space, cfg.setting, cfg.n, s);
        });
    }

    const double count = double(rep.replicates.size());
    double sum = 0.0;
    rep.min_rise = rep.replicates.front().rise;
    rep.max_rise = rep.replicates.front().rise;
    for (const auto& r : rep.replicates) {
        sum += r.rise;
        rep.min_rise = std::min(rep.min_rise, r.rise);
        rep.max_rise = std::max(rep.max_rise, r.rise);
    }
    rep.mean_rise = sum / count;
    double ss = 0.0;
    for (const auto& r : rep.replicates) ss += (r.rise - rep.mean_rise) * (r.rise - rep.mean_rise);
    rep.sd_rise = rep.replicates.size() > 1 ? std::sqrt(ss / (count - 1.0)) : 0.0;
    return rep;
}

std::string summary_line(const SimReport& report) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-11s %-2s n=%-4zu RISE %.3f (%.3f) over %zu replicates",
                  std::string(to_string(report.config.space)).c_str(),
                  std::string(to_string(report.config.setting)).c_str(), report.config.n, report.mean_rise,
                  report.sd_rise, report.replicates.size());
    return buf;
}

}  // namespace tvfr
