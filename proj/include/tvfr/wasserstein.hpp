#pragma once

// 2-Wasserstein space of distributions on the real line, represented by quantile functions
// sampled at the midpoint nodes s_g = (g - 1/2)/G, g = 1..G.

#include <cstddef>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "tvfr/metric_space.hpp"

namespace tvfr {

inline constexpr std::size_t kDefaultQuantileGrid = 1000;

struct QuantilePoint {
    Eigen::VectorXd values;

    std::size_t grid_size() const noexcept { return std::size_t(values.size()); }
    friend bool operator==(const QuantilePoint& a, const QuantilePoint& b) { return a.values == b.values; }
};

// Midpoint node s_g for 0-based g.
inline double quantile_node(std::size_t g, std::size_t grid) { return (double(g) + 0.5) / double(grid); }

// Least-squares projection onto nondecreasing sequences (pool adjacent violators).
Eigen::VectorXd isotonic_projection(const Eigen::VectorXd& v);

// Builds a QuantilePoint from raw values; applies the isotonic projection when some value
// drops by more than 1e-12 below its predecessor. Throws InvalidInput on non-finite input.
QuantilePoint make_quantile_point(Eigen::VectorXd values);

// Empirical quantiles at the midpoint nodes, linear between order statistics placed at (k - 1/2)/N.
QuantilePoint quantile_from_samples(std::span<const double> samples, std::size_t grid);

// Quantiles of N(mean, sd^2).
QuantilePoint gaussian_quantile_point(double mean, double sd, std::size_t grid);

// Monotone transport map T_k(x) = x - sin(kx)/|k| for k in {-2,-1,1,2}.
class TransportMap {
public:
    explicit TransportMap(int k);
    int k() const noexcept { return k_; }
    double operator()(double x) const;

private:
    int k_;
};

QuantilePoint pushforward(const QuantilePoint& f, const TransportMap& map);

double w2_distance(const QuantilePoint& f, const QuantilePoint& g);
QuantilePoint w2_geodesic(const QuantilePoint& f, const QuantilePoint& g, double theta);
QuantilePoint w2_frechet_mean(std::span<const QuantilePoint> points);

// Mean and standard deviation of the distribution, computed from its quantile grid.
struct Moments {
    double mean = 0.0;
    double sd = 0.0;
};
Moments quantile_moments(const QuantilePoint& f);

class Wasserstein2 {
public:
    using Point = QuantilePoint;

    class Segment {
    public:
        Segment(const Point& f, const Point& g);
        double length() const noexcept { return length_; }
        Point at(double theta) const;

    private:
        const Point* f_;
        const Point* g_;
        double length_;
    };

    explicit Wasserstein2(std::size_t grid = kDefaultQuantileGrid);

    static constexpr std::string_view name() { return "wasserstein"; }
    std::size_t grid_size() const noexcept { return grid_; }

    // Φ^{-1}(s_g) on this space's grid, computed once.
    const Eigen::VectorXd& standard_normal_quantiles() const noexcept { return *z_; }
    QuantilePoint gaussian(double mean, double sd) const;

    double distance(const Point& f, const Point& g) const { return w2_distance(f, g); }
    Point geodesic(const Point& f, const Point& g, double theta) const { return w2_geodesic(f, g, theta); }
    Segment segment(const Point& f, const Point& g) const { return Segment(f, g); }
    Shape shape(const Point& f) const { return {f.grid_size(), 1}; }
    void validate(const Point& f) const;
    Point frechet_mean(std::span<const Point> points) const { return w2_frechet_mean(points); }

    void move_toward(Point& f, const Point& g, double theta) const { f.values += theta * (g.values - f.values); }
    void pull_together(Point& f, Point& g, double theta) const;

private:
    std::size_t grid_;
    std::shared_ptr<const Eigen::VectorXd> z_;
};

}  // namespace tvfr
