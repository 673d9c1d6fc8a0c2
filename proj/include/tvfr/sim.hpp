#pragma once

// Monte-Carlo harness: the piecewise-constant (Setting I) and smooth (Setting II) mean
// curves for SPD(3) and W2(R), their noise generators, RISE, and the replicated
// cross-validated experiment.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tvfr/rng.hpp"
#include "tvfr/solver.hpp"
#include "tvfr/spd.hpp"
#include "tvfr/wasserstein.hpp"

namespace tvfr {

enum class Setting { I, II };
enum class SimSpace { Spd, Wasserstein };

std::string_view to_string(Setting s);
std::string_view to_string(SimSpace s);
Setting parse_setting(std::string_view s);
SimSpace parse_sim_space(std::string_view s);

// Two-branch logistic bump: rises to 2 around t = 1/4, falls back around t = 3/4.
double phi(double t);

// Index of the third containing t: [0,1/3) -> 0, [1/3,2/3) -> 1, [2/3,1] -> 2.
int third_of(double t);

struct SpdMeanFunction {
    Setting setting;
    SpdPoint operator()(double t) const;
};

struct WassMeanFunction {
    Setting setting;
    Wasserstein2 space;
    QuantilePoint operator()(double t) const;
};

using MeanFunction = std::variant<SpdMeanFunction, WassMeanFunction>;

// Accepts "spd", "spd-ai" or "wasserstein"; anything else is InvalidInput.
MeanFunction mean_function(std::string_view space, Setting setting,
                           std::size_t quantile_grid = kDefaultQuantileGrid);

// mu^{1/2} exp(mu^{-1/2} S mu^{-1/2}) mu^{1/2}, with the six lower-triangle entries of the
// symmetric S drawn i.i.d. N(0, noise_sd^2).
SpdPoint gen_spd(const SpdPoint& mu, CounterRng& rng, double noise_sd = 0.25);

// Latent draws behind one gen_wass output.
struct WassNoise {
    double nu = 0.0;
    double sigma = 0.0;
    int k = 1;
};
WassNoise draw_wass_noise(const Moments& base, CounterRng& rng);

// Random Gaussian N(nu, sigma^2) around mu's mean a and SD b (nu ~ N(a,1), sigma ~
// Gamma(shape b^2/2, rate b/2)), pushed forward by a transport map drawn from k in {±1,±2}.
QuantilePoint gen_wass(const Wasserstein2& space, const QuantilePoint& mu, CounterRng& rng);

// Midpoint nodes (k + 1/2)/grid of the RISE quadrature.
std::vector<double> rise_nodes(std::size_t grid);

// {∫ d²(step(t), truth(t)) dt}^{1/2} by the midpoint rule; `truth` holds the true curve
// at rise_nodes(truth.size()).
template <MetricSpace S>
double rise(const S& space, const StepFunction<typename S::Point>& step,
            std::span<const typename S::Point> truth) {
    if (truth.empty()) throw InvalidInput("rise: empty evaluation grid");
    const auto nodes = rise_nodes(truth.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        const double d = space.distance(step(nodes[k]), truth[k]);
        acc += d * d;
    }
    return std::sqrt(acc / double(nodes.size()));
}

template <MetricSpace S, class Truth>
double rise(const S& space, const StepFunction<typename S::Point>& step, const Truth& truth,
            std::size_t grid = 1001) {
    std::vector<typename S::Point> values;
    values.reserve(grid);
    for (double t : rise_nodes(grid)) values.push_back(truth(t));
    return rise(space, step, std::span<const typename S::Point>(values));
}

struct LambdaGrid {
    double lo = 1e-3;
    double hi = 1.0;
    int count = 20;
    bool log_spaced = true;
    bool relative = true;  // multiply by the median adjacent distance of each data set
};

std::vector<double> lambda_values(const LambdaGrid& grid, double scale = 1.0);

struct SimConfig {
    SimSpace space = SimSpace::Spd;
    Setting setting = Setting::I;
    std::size_t n = 50;
    int replicates = 100;
    std::uint64_t seed = 20240101;
    int folds = 5;
    LambdaGrid lambda_grid;
    SolverConfig solver;
    std::size_t quantile_grid = kDefaultQuantileGrid;
    std::size_t rise_grid = 1001;
    unsigned threads = 1;
};

void validate(const SimConfig& cfg);

struct ReplicateResult {
    int index = 0;
    std::uint64_t seed = 0;
    double lambda = 0.0;
    double rise = 0.0;
    std::size_t jumps = 0;
    int cycles = 0;
};

struct SimReport {
    SimConfig config;
    std::vector<ReplicateResult> replicates;
    double mean_rise = 0.0;
    double sd_rise = 0.0;  // sample SD over replicates (0 for a single replicate)
    double min_rise = 0.0;
    double max_rise = 0.0;
};

// Design t_i = (i-1)/(n-1) and one noisy draw per design point; deterministic in `seed`.
TimeSeries<SpdPoint> simulate_spd_series(Setting setting, std::size_t n, std::uint64_t seed);
TimeSeries<QuantilePoint> simulate_wass_series(const Wasserstein2& space, Setting setting, std::size_t n,
                                               std::uint64_t seed);

// Replicate r uses seed derive_seed(cfg.seed, r): stream 0 generates data, stream 1 the
// CV folds. Results are reduced in replicate order, so the report is independent of threads.
SimReport run_experiment(const SimConfig& cfg);

// One line: space, setting, n, mean RISE and (SD) over the replicates.
std::string summary_line(const SimReport& report);

}  // namespace tvfr
