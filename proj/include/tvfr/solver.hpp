#pragma once

// Total-variation regularized Fréchet regression on a geodesic metric space.
//
// Minimizes L_λ(g) = n^-1 Σ d²(g(t_i), Y_i) + λ·TV(g) over step functions by the cyclic
// proximal point algorithm. Each cycle r uses step α_r = α₀/r and applies, in order, the
// data proximal map to every point and the pairwise TV proximal map to every adjacent pair
// j = 1..n-1. The algorithm actually minimizes (n/2)·L_λ, which has the same minimizers.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tvfr/errors.hpp"
#include "tvfr/metric_space.hpp"
#include "tvfr/parallel.hpp"
#include "tvfr/rng.hpp"

namespace tvfr {

struct SolverConfig {
    double lambda = 0.0;
    // α₀ in α_r = α₀/r. Non-positive means 2·(median adjacent data distance + 1e-12).
    double step_scale = 0.0;
    int max_cycles = 500;
    double rel_tol = 1e-8;
    int window = 10;
    // Adjacent fitted values closer than jump_merge_tol·(median adjacent data distance), or
    // than the solver's final resolution α_R·λ·n, belong to the same constant piece.
    double jump_merge_tol = 1e-3;
};

template <class P>
struct FitResult {
    std::vector<P> fitted;
    StepFunction<P> step;
    std::vector<std::size_t> jumps;  // i such that the fit jumps between design points i and i+1 (0-based)
    double lambda = 0.0;
    std::vector<double> objective_trace;
    int cycles_run = 0;
    bool converged = false;
    double step_scale = 0.0;
    double jump_threshold = 0.0;
};

template <MetricSpace S>
double median_adjacent_distance(const S& space, std::span<const typename S::Point> values) {
    if (values.size() < 2) return 0.0;
    std::vector<double> d(values.size() - 1);
    for (std::size_t i = 0; i + 1 < values.size(); ++i) d[i] = space.distance(values[i], values[i + 1]);
    const std::size_t mid = d.size() / 2;
    std::nth_element(d.begin(), d.begin() + std::ptrdiff_t(mid), d.end());
    if (d.size() % 2 == 1) return d[mid];
    const double upper = d[mid];
    const double lower = *std::max_element(d.begin(), d.begin() + std::ptrdiff_t(mid));
    return 0.5 * (lower + upper);
}

template <MetricSpace S>
double objective(const S& space, std::span<const typename S::Point> values,
                 const TimeSeries<typename S::Point>& series, double lambda) {
    if (values.size() != series.size()) throw InvalidInput("objective: length mismatch");
    if (values.empty()) throw InvalidInput("objective: empty sequence");
    double data = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double d = space.distance(values[i], series[i]);
        data += d * d;
    }
    double tv = 0.0;
    if (lambda != 0.0)
        for (std::size_t i = 0; i + 1 < values.size(); ++i) tv += space.distance(values[i], values[i + 1]);
    return data / double(values.size()) + lambda * tv;
}

// Proximal map of α·½d²(·, y): the point at fraction α/(1+α) from p toward y.
template <MetricSpace S>
typename S::Point prox_data(const S& space, const typename S::Point& p, const typename S::Point& y,
                            double alpha) {
    if (!(alpha > 0.0)) throw InvalidInput("prox_data: step must be positive");
    return space.segment(p, y).at(alpha / (1.0 + alpha));
}

// Proximal map of α·(nλ/2)·d(p, q) on the pair: both ends move toward each other by
// fraction θ = min{αλn/(2d), 1/2}; θ = 1/2 fuses them at the midpoint.
template <MetricSpace S>
std::pair<typename S::Point, typename S::Point> prox_tv_pair(const S& space, const typename S::Point& p,
                                                             const typename S::Point& q, double alpha,
                                                             double lambda, std::size_t n) {
    if (!(alpha >= 0.0) || !(lambda >= 0.0)) throw InvalidInput("prox_tv_pair: step and lambda must be >= 0");
    if (alpha == 0.0 || lambda == 0.0) return {p, q};
    const auto seg = space.segment(p, q);
    const double d = seg.length();
    if (d == 0.0) return {p, q};
    const double theta = std::min(alpha * lambda * double(n) / (2.0 * d), 0.5);
    if (theta == 0.5) {
        auto mid = seg.at(0.5);
        return {mid, mid};
    }
    return {seg.at(theta), seg.at(1.0 - theta)};
}

template <MetricSpace S>
std::vector<std::size_t> extract_jumps(const S& space, std::span<const typename S::Point> fitted,
                                       double threshold) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i + 1 < fitted.size(); ++i)
        if (space.distance(fitted[i], fitted[i + 1]) > threshold) out.push_back(i);
    return out;
}

// Jump threshold relative to the median adjacent distance of the raw observations.
template <MetricSpace S>
std::vector<std::size_t> extract_jumps(const S& space, std::span<const typename S::Point> fitted,
                                       double merge_tol, std::span<const typename S::Point> observations) {
    return extract_jumps(space, fitted, merge_tol * median_adjacent_distance(space, observations));
}

template <MetricSpace S>
FitResult<typename S::Point> fit(const S& space, const TimeSeries<typename S::Point>& series,
                                 const SolverConfig& cfg) {
    using P = typename S::Point;
    const std::size_t n = series.size();
    if (n == 0) throw InvalidInput("fit: empty series");
    if (!(cfg.lambda >= 0.0)) throw InvalidInput("fit: lambda must be >= 0");
    if (cfg.max_cycles < 1) throw InvalidInput("fit: max_cycles must be positive");
    if (!(cfg.rel_tol > 0.0)) throw InvalidInput("fit: rel_tol must be positive");
    if (cfg.window < 1) throw InvalidInput("fit: window must be positive");
    const std::span<const P> obs(series.observations());
    check_compatible(space, obs);

    const double scale = median_adjacent_distance(space, obs);
    const double alpha0 = cfg.step_scale > 0.0 ? cfg.step_scale : 2.0 * (scale + 1e-12);

    std::vector<P> mu(obs.begin(), obs.end());
    std::vector<double> trace;
    trace.reserve(std::size_t(std::min(cfg.max_cycles, 100000)));
    bool converged = false;
    int r = 1;
    for (; r <= cfg.max_cycles; ++r) {
        const double alpha = alpha0 / double(r);
        double value = 0.0;
        try {
            const double theta = alpha / (1.0 + alpha);
            if constexpr (InPlaceGeodesic<S>) {
                for (std::size_t i = 0; i < n; ++i) space.move_toward(mu[i], obs[i], theta);
                if (cfg.lambda > 0.0) {
                    const double w = alpha * cfg.lambda * double(n) / 2.0;
                    for (std::size_t j = 0; j + 1 < n; ++j) {
                        const double d = space.distance(mu[j], mu[j + 1]);
                        if (d > 0.0) space.pull_together(mu[j], mu[j + 1], std::min(w / d, 0.5));
                    }
                }
            } else {
                for (std::size_t i = 0; i < n; ++i) mu[i] = space.segment(mu[i], obs[i]).at(theta);
                if (cfg.lambda > 0.0) {
                    for (std::size_t j = 0; j + 1 < n; ++j) {
                        auto [a, b] = prox_tv_pair(space, mu[j], mu[j + 1], alpha, cfg.lambda, n);
                        mu[j] = std::move(a);
                        mu[j + 1] = std::move(b);
                    }
                }
            }
            value = objective(space, std::span<const P>(mu), series, cfg.lambda);
        } catch (const ConvergenceFailure& e) {
            // A matrix routine gave up mid-cycle; hand the current iterate to the caller.
            throw ConvergenceFailure(std::string(e.what()) + " (cycle " + std::to_string(r) + ")", mu);
        }
        trace.push_back(value);
        if (trace.size() > std::size_t(cfg.window)) {
            const double before = trace[trace.size() - 1 - std::size_t(cfg.window)];
            if (std::abs(before - value) <= cfg.rel_tol * std::abs(value)) {
                converged = true;
                break;
            }
        }
    }

    // CPPA leaves fused neighbours apart by up to the last pair-prox shift 2w = α_R·λ·n,
    // so gaps at that resolution are not counted as jumps either.
    const double alpha_last = alpha0 / double(std::min(r, cfg.max_cycles));
    const double threshold = std::max(cfg.jump_merge_tol * scale, alpha_last * cfg.lambda * double(n));
    auto jumps = extract_jumps(space, std::span<const P>(mu), threshold);
    auto step = StepFunction<P>::from_design(series.design(), mu);
    return FitResult<P>{std::move(mu),
                        std::move(step),
                        std::move(jumps),
                        cfg.lambda,
                        std::move(trace),
                        std::min(r, cfg.max_cycles),
                        converged,
                        alpha0,
                        threshold};
}

// ---------------------------------------------------------------------------------------
// Cross-validation

struct CvResult {
    double best_lambda = 0.0;
    std::vector<double> lambdas;
    std::vector<double> errors;  // summed held-out squared distances, one per lambda
};

// Random even partition of 0..n-1 into `folds` sorted index sets.
std::vector<std::vector<std::size_t>> make_folds(std::size_t n, int folds, std::uint64_t seed);

// Index of the minimum error; near-ties (within 1e-12 relative) go to the larger lambda.
std::size_t select_min_error(std::span<const double> lambdas, std::span<const double> errors);

template <MetricSpace S>
CvResult cross_validate(const S& space, const TimeSeries<typename S::Point>& series,
                        std::span<const double> lambdas, const SolverConfig& base, int folds,
                        std::uint64_t seed, unsigned threads = 1) {
    using P = typename S::Point;
    if (lambdas.empty()) throw InvalidInput("cross_validate: empty lambda grid");
    if (folds < 2) throw InvalidInput("cross_validate: need at least 2 folds");
    if (series.size() < std::size_t(folds))
        throw InvalidInput("cross_validate: " + std::to_string(folds) + " folds but only " +
                           std::to_string(series.size()) + " observations");
    for (double l : lambdas)
        if (!(l >= 0.0)) throw InvalidInput("cross_validate: lambdas must be >= 0");

    const auto parts = make_folds(series.size(), folds, seed);
    std::vector<TimeSeries<P>> train;
    train.reserve(parts.size());
    for (const auto& held : parts) {
        std::vector<std::size_t> keep;
        keep.reserve(series.size() - held.size());
        std::size_t h = 0;
        for (std::size_t i = 0; i < series.size(); ++i) {
            if (h < held.size() && held[h] == i) {
                ++h;
                continue;
            }
            keep.push_back(i);
        }
        train.push_back(series.subset(keep));
    }

    const std::size_t tasks = lambdas.size() * parts.size();
    std::vector<double> partial(tasks, 0.0);
    parallel_for(tasks, threads, [&](std::size_t task) {
        const std::size_t li = task / parts.size(), k = task % parts.size();
        SolverConfig cfg = base;
        cfg.lambda = lambdas[li];
        const auto res = fit(space, train[k], cfg);
        double err = 0.0;
        for (auto i : parts[k]) {
            const double d = space.distance(res.step(series.design()[i]), series[i]);
            err += d * d;
        }
        partial[task] = err;
    });

    CvResult out;
    out.lambdas.assign(lambdas.begin(), lambdas.end());
    out.errors.assign(lambdas.size(), 0.0);
    for (std::size_t task = 0; task < tasks; ++task) out.errors[task / parts.size()] += partial[task];
    out.best_lambda = out.lambdas[select_min_error(out.lambdas, out.errors)];
    return out;
}

// ---------------------------------------------------------------------------------------
// Jump-count targeted lambda

template <class P>
struct JumpSelection {
    double lambda = 0.0;
    FitResult<P> fit;
    std::size_t achieved = 0;
    bool exact = false;               // achieved == target
    bool monotonicity_violated = false;  // a probe's jump count fell outside its bracket
    int fits_run = 0;
};

// Smallest λ in [lo, hi] (resolved to `rel_width` in log scale) whose fit has exactly
// `target` jumps. Requires jumps(lo) >= target >= jumps(hi).
template <MetricSpace S>
JumpSelection<typename S::Point> select_lambda_by_jumps(const S& space,
                                                        const TimeSeries<typename S::Point>& series,
                                                        std::size_t target, double lo, double hi,
                                                        const SolverConfig& base, double rel_width = 0.01) {
    using P = typename S::Point;
    if (!(lo > 0.0) || !(hi > lo)) throw InvalidInput("select_lambda_by_jumps: need 0 < lo < hi");
    if (!(rel_width > 0.0)) throw InvalidInput("select_lambda_by_jumps: rel_width must be positive");

    int fits = 0;
    auto run = [&](double lambda) {
        SolverConfig cfg = base;
        cfg.lambda = lambda;
        ++fits;
        return fit(space, series, cfg);
    };

    FitResult<P> f_lo = run(lo);
    FitResult<P> f_hi = run(hi);
    if (f_lo.jumps.size() < target || f_hi.jumps.size() > target)
        throw InvalidInput("select_lambda_by_jumps: invalid bracket, jumps(lo)=" +
                           std::to_string(f_lo.jumps.size()) + ", jumps(hi)=" +
                           std::to_string(f_hi.jumps.size()) + ", target=" + std::to_string(target));
    if (f_lo.jumps.size() == target) {
        const std::size_t got = f_lo.jumps.size();
        return {lo, std::move(f_lo), got, true, false, fits};
    }

    auto gap = [target](const FitResult<P>& f) {
        const auto j = f.jumps.size();
        return j > target ? j - target : target - j;
    };
    double best_lambda = hi;
    FitResult<P> best = f_hi;  // closest count seen so far; ties keep the smaller lambda
    bool violated = false;
    while (hi / lo > 1.0 + rel_width) {
        const double mid = std::sqrt(lo * hi);
        FitResult<P> f_mid = run(mid);
        const auto j = f_mid.jumps.size();
        if (j > f_lo.jumps.size() || j < f_hi.jumps.size()) violated = true;
        if (gap(f_mid) < gap(best) || (gap(f_mid) == gap(best) && mid < best_lambda)) {
            best = f_mid;
            best_lambda = mid;
        }
        if (j > target) {
            lo = mid;
            f_lo = std::move(f_mid);
        } else {
            hi = mid;
            f_hi = std::move(f_mid);
        }
    }
    if (f_hi.jumps.size() == target) {
        const std::size_t got = target;
        return {hi, std::move(f_hi), got, true, violated, fits};
    }
    const std::size_t got = best.jumps.size();
    return {best_lambda, std::move(best), got, got == target, violated, fits};
}

}  // namespace tvfr
