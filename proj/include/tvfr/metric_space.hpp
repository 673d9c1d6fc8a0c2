#pragma once

// Space-agnostic machinery: the geodesic metric space contract, time series, step
// functions, total variation, the empirical pseudo-metric d_n and Fréchet means.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tvfr/errors.hpp"

namespace tvfr {

// Shape metadata of a point (k×1 for vectors, m×m for matrices, G×1 for quantile grids).
struct Shape {
    std::size_t rows = 0;
    std::size_t cols = 1;
    friend bool operator==(const Shape&, const Shape&) = default;
};

inline std::string to_string(const Shape& s) {
    return std::to_string(s.rows) + "x" + std::to_string(s.cols);
}

// A uniquely geodesic metric space. `segment(p, q)` exposes the geodesic from p to q with
// any per-pair factorization cached, so `length()` and repeated `at(theta)` are cheap.
template <class S>
concept MetricSpace = std::copy_constructible<S> &&
    requires(const S& s, const typename S::Point& p, double theta) {
        { s.distance(p, p) } -> std::convertible_to<double>;
        { s.geodesic(p, p, theta) } -> std::same_as<typename S::Point>;
        { s.shape(p) } -> std::same_as<Shape>;
        { s.validate(p) };
        { s.segment(p, p).length() } -> std::convertible_to<double>;
        { s.segment(p, p).at(theta) } -> std::same_as<typename S::Point>;
    };

// Backends with a closed-form (or specialized) Fréchet mean.
template <class S>
concept HasFrechetMean = MetricSpace<S> &&
    requires(const S& s, std::span<const typename S::Point> pts) {
        { s.frechet_mean(pts) } -> std::same_as<typename S::Point>;
    };

// Backends that can move points along geodesics without allocating. move_toward replaces
// p by [p, q]_θ; pull_together replaces (p, q) by ([p, q]_θ, [q, p]_θ), with both set to
// the identical midpoint when θ = 1/2.
template <class S>
concept InPlaceGeodesic = MetricSpace<S> &&
    requires(const S& s, typename S::Point& p, const typename S::Point& q, double theta) {
        { s.move_toward(p, q, theta) };
        { s.pull_together(p, p, theta) };
    };

template <MetricSpace S>
void check_compatible(const S& space, std::span<const typename S::Point> points) {
    if (points.empty()) return;
    const Shape first = space.shape(points.front());
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!(space.shape(points[i]) == first)) {
            throw InvalidInput("shape mismatch at index " + std::to_string(i) + ": expected " +
                               to_string(first) + ", got " + to_string(space.shape(points[i])));
        }
    }
}

inline std::vector<double> equally_spaced_design(std::size_t n) {
    std::vector<double> t(n, 0.0);
    if (n > 1) {
        for (std::size_t i = 0; i < n; ++i) t[i] = double(i) / double(n - 1);
        t.back() = 1.0;
    }
    return t;
}

// Observations Y_i at strictly increasing design points t_i in [0,1].
template <class P>
class TimeSeries {
public:
    explicit TimeSeries(std::vector<P> observations)
        : design_(equally_spaced_design(observations.size())), obs_(std::move(observations)) {}

    TimeSeries(std::vector<double> design, std::vector<P> observations)
        : design_(std::move(design)), obs_(std::move(observations)) {
        if (design_.size() != obs_.size())
            throw InvalidInput("design and observation counts differ");
        for (std::size_t i = 0; i < design_.size(); ++i) {
            const double t = design_[i];
            if (!(t >= 0.0 && t <= 1.0)) throw InvalidInput("design point outside [0,1]");
            if (i > 0 && !(t > design_[i - 1]))
                throw InvalidInput("design points must be strictly increasing");
        }
    }

    std::size_t size() const noexcept { return obs_.size(); }
    bool empty() const noexcept { return obs_.empty(); }
    const std::vector<double>& design() const noexcept { return design_; }
    const std::vector<P>& observations() const noexcept { return obs_; }
    const P& operator[](std::size_t i) const { return obs_[i]; }

    // Sub-series on the given (sorted) indices, keeping the original design points.
    TimeSeries subset(std::span<const std::size_t> idx) const {
        std::vector<double> t;
        std::vector<P> y;
        t.reserve(idx.size());
        y.reserve(idx.size());
        for (auto i : idx) {
            t.push_back(design_.at(i));
            y.push_back(obs_.at(i));
        }
        return TimeSeries(std::move(t), std::move(y));
    }

private:
    std::vector<double> design_;
    std::vector<P> obs_;
};

// Piecewise-constant curve on [0,1]. Interval k is [b_k, b_{k+1}); the final interval is
// closed at 1. Breakpoints are nondecreasing, start at 0 and end at 1.
template <class P>
class StepFunction {
public:
    StepFunction(std::vector<double> breakpoints, std::vector<P> values)
        : breaks_(std::move(breakpoints)), values_(std::move(values)) {
        if (values_.empty()) throw InvalidInput("step function needs at least one value");
        if (breaks_.size() != values_.size() + 1)
            throw InvalidInput("step function needs one more breakpoint than values");
        if (breaks_.front() != 0.0 || breaks_.back() != 1.0)
            throw InvalidInput("step function breakpoints must span [0,1]");
        if (!std::is_sorted(breaks_.begin(), breaks_.end()))
            throw InvalidInput("step function breakpoints must be sorted");
    }

    // Value at design t_i holds on [t_i, t_{i+1}); the first value is extended back to 0.
    static StepFunction from_design(std::span<const double> design, std::vector<P> fitted) {
        if (design.size() != fitted.size())
            throw InvalidInput("design and fitted value counts differ");
        if (fitted.empty()) throw InvalidInput("cannot build a step function from no values");
        std::vector<double> b;
        b.reserve(design.size() + 1);
        b.push_back(0.0);
        for (std::size_t i = 1; i < design.size(); ++i) b.push_back(design[i]);
        b.push_back(1.0);
        return StepFunction(std::move(b), std::move(fitted));
    }

    const P& operator()(double t) const {
        if (!(t >= 0.0 && t <= 1.0)) throw InvalidInput("step function evaluated outside [0,1]");
        auto it = std::upper_bound(breaks_.begin(), breaks_.end(), t);
        std::ptrdiff_t k = (it - breaks_.begin()) - 1;
        k = std::clamp<std::ptrdiff_t>(k, 0, std::ptrdiff_t(values_.size()) - 1);
        return values_[std::size_t(k)];
    }

    const std::vector<double>& breakpoints() const noexcept { return breaks_; }
    const std::vector<P>& values() const noexcept { return values_; }

private:
    std::vector<double> breaks_;
    std::vector<P> values_;
};

template <class P>
const P& evaluate_step(const StepFunction<P>& f, double t) {
    return f(t);
}

template <MetricSpace S>
double total_variation(const S& space, std::span<const typename S::Point> values) {
    if (values.empty()) throw InvalidInput("total variation of an empty sequence");
    check_compatible(space, values);
    double tv = 0.0;
    for (std::size_t i = 0; i + 1 < values.size(); ++i) tv += space.distance(values[i], values[i + 1]);
    return tv;
}

template <MetricSpace S>
double total_variation(const S& space, const StepFunction<typename S::Point>& f) {
    return total_variation(space, std::span<const typename S::Point>(f.values()));
}

// d_n(f, g) = { n^-1 sum d^2(f_i, g_i) }^{1/2}
template <MetricSpace S>
double dn_distance(const S& space, std::span<const typename S::Point> f,
                   std::span<const typename S::Point> g) {
    if (f.size() != g.size()) throw InvalidInput("d_n: sequences differ in length");
    if (f.empty()) throw InvalidInput("d_n: empty sequences");
    double acc = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (!(space.shape(f[i]) == space.shape(g[i])))
            throw InvalidInput("d_n: shape mismatch at index " + std::to_string(i));
        const double d = space.distance(f[i], g[i]);
        acc += d * d;
    }
    return std::sqrt(acc / double(f.size()));
}

// Sum of squared distances from x to the points.
template <MetricSpace S>
double frechet_function(const S& space, const typename S::Point& x,
                        std::span<const typename S::Point> points) {
    double acc = 0.0;
    for (const auto& y : points) {
        const double d = space.distance(x, y);
        acc += d * d;
    }
    return acc;
}

struct MeanOptions {
    int max_passes = 50;
    double tol = 1e-10;
    std::uint64_t seed = 0x5eed;
};

// Inductive geodesic mean: x <- [x, Y_k]_{1/(k+1)} with the counter k running across
// shuffled passes. Exact after one pass in flat spaces; converges in Hadamard spaces.
template <MetricSpace S>
typename S::Point inductive_mean(const S& space, std::span<const typename S::Point> points,
                                 const MeanOptions& opts = {}) {
    if (points.empty()) throw InvalidInput("Fréchet mean of no points");
    check_compatible(space, points);
    using P = typename S::Point;
    if (points.size() == 1) return points.front();

    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(opts.seed);

    P x = points.front();
    double absorbed = 0.0;
    double prev = frechet_function(space, x, points);
    for (int pass = 0; pass < opts.max_passes; ++pass) {
        std::shuffle(order.begin(), order.end(), rng);
        for (auto i : order) {
            absorbed += 1.0;
            x = (absorbed == 1.0) ? points[i] : space.geodesic(x, points[i], 1.0 / absorbed);
        }
        const double f = frechet_function(space, x, points);
        if (pass > 0 && prev - f < opts.tol * (1.0 + f)) return x;
        prev = f;
    }
    throw ConvergenceFailure("inductive mean: objective still decreasing after " +
                                 std::to_string(opts.max_passes) + " passes",
                             x);
}

template <MetricSpace S>
typename S::Point frechet_mean(const S& space, std::span<const typename S::Point> points,
                               const MeanOptions& opts = {}) {
    if constexpr (HasFrechetMean<S>) {
        (void)opts;
        if (points.empty()) throw InvalidInput("Fréchet mean of no points");
        check_compatible(space, points);
        return space.frechet_mean(points);
    } else {
        return inductive_mean(space, points, opts);
    }
}

}  // namespace tvfr
