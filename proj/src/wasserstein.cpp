#include "tvfr/wasserstein.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tvfr/normal.hpp"

namespace tvfr {

namespace {

constexpr double kMonotoneTol = 1e-12;

void require_same_grid(const QuantilePoint& f, const QuantilePoint& g) {
    if (f.grid_size() != g.grid_size())
        throw InvalidInput("wasserstein: grid size mismatch (" + std::to_string(f.grid_size()) + " vs " +
                           std::to_string(g.grid_size()) + ")");
}

Eigen::VectorXd standard_normal_grid(std::size_t grid) {
    Eigen::VectorXd z(static_cast<Eigen::Index>(grid));
    for (std::size_t g = 0; g < grid; ++g) z(Eigen::Index(g)) = normal_quantile(quantile_node(g, grid));
    return z;
}

}  // namespace

Eigen::VectorXd isotonic_projection(const Eigen::VectorXd& v) {
    // Blocks of (mean, weight); merge while the last two are out of order.
    std::vector<double> mean;
    std::vector<Eigen::Index> weight;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        mean.push_back(v(i));
        weight.push_back(1);
        while (mean.size() > 1 && mean[mean.size() - 2] > mean.back()) {
            const auto w1 = weight[weight.size() - 2], w2 = weight.back();
            const double m = (mean[mean.size() - 2] * double(w1) + mean.back() * double(w2)) / double(w1 + w2);
            mean.pop_back();
            weight.pop_back();
            mean.back() = m;
            weight.back() = w1 + w2;
        }
    }
    Eigen::VectorXd out(v.size());
    Eigen::Index pos = 0;
    for (std::size_t b = 0; b < mean.size(); ++b)
        for (Eigen::Index k = 0; k < weight[b]; ++k) out(pos++) = mean[b];
    return out;
}

QuantilePoint make_quantile_point(Eigen::VectorXd values) {
    if (values.size() == 0) throw InvalidInput("quantile point needs at least one value");
    if (!values.allFinite()) throw InvalidInput("quantile point has non-finite values");
    for (Eigen::Index i = 1; i < values.size(); ++i) {
        if (values(i) < values(i - 1) - kMonotoneTol) {
            values = isotonic_projection(values);
            break;
        }
    }
    return QuantilePoint{std::move(values)};
}

QuantilePoint quantile_from_samples(std::span<const double> samples, std::size_t grid) {
    if (samples.empty()) throw InvalidInput("quantile_from_samples: no samples");
    if (grid == 0) throw InvalidInput("quantile_from_samples: grid size must be positive");
    std::vector<double> x(samples.begin(), samples.end());
    for (double v : x)
        if (!std::isfinite(v)) throw InvalidInput("quantile_from_samples: non-finite sample");
    std::sort(x.begin(), x.end());
    const double n = double(x.size());
    Eigen::VectorXd q(static_cast<Eigen::Index>(grid));
    for (std::size_t g = 0; g < grid; ++g) {
        // Order statistic x_(k) (1-based) sits at probability (k - 1/2)/n.
        const double h = n * quantile_node(g, grid) + 0.5;
        if (h <= 1.0) {
            q(Eigen::Index(g)) = x.front();
        } else if (h >= n) {
            q(Eigen::Index(g)) = x.back();
        } else {
            const double lo = std::floor(h);
            const auto k = std::size_t(lo) - 1;
            q(Eigen::Index(g)) = x[k] + (h - lo) * (x[k + 1] - x[k]);
        }
    }
    return make_quantile_point(std::move(q));
}

QuantilePoint gaussian_quantile_point(double mean, double sd, std::size_t grid) {
    if (grid == 0) throw InvalidInput("gaussian_quantile_point: grid size must be positive");
    return Wasserstein2(grid).gaussian(mean, sd);
}

TransportMap::TransportMap(int k) : k_(k) {
    if (k != 1 && k != -1 && k != 2 && k != -2) throw InvalidInput("transport map index must be in {-2,-1,1,2}");
}

double TransportMap::operator()(double x) const {
    return x - std::sin(double(k_) * x) / double(std::abs(k_));
}

QuantilePoint pushforward(const QuantilePoint& f, const TransportMap& map) {
    QuantilePoint out{f.values.unaryExpr([&map](double x) { return map(x); })};
    return out;
}

double w2_distance(const QuantilePoint& f, const QuantilePoint& g) {
    require_same_grid(f, g);
    if (f.grid_size() == 0) throw InvalidInput("wasserstein: empty grid");
    return std::sqrt((f.values - g.values).squaredNorm() / double(f.grid_size()));
}

Wasserstein2::Segment::Segment(const Point& f, const Point& g) : f_(&f), g_(&g), length_(w2_distance(f, g)) {}

QuantilePoint Wasserstein2::Segment::at(double theta) const {
    if (theta == 0.0) return *f_;
    if (theta == 1.0) return *g_;
    return QuantilePoint{f_->values + theta * (g_->values - f_->values)};
}

QuantilePoint w2_geodesic(const QuantilePoint& f, const QuantilePoint& g, double theta) {
    if (!(theta >= 0.0 && theta <= 1.0)) throw InvalidInput("geodesic parameter outside [0,1]");
    return Wasserstein2::Segment(f, g).at(theta);
}

QuantilePoint w2_frechet_mean(std::span<const QuantilePoint> points) {
    if (points.empty()) throw InvalidInput("wasserstein mean of no points");
    if (points.size() == 1) return points.front();
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(points.front().values.size());
    for (const auto& p : points) {
        require_same_grid(points.front(), p);
        acc += p.values;
    }
    return QuantilePoint{acc / double(points.size())};
}

Moments quantile_moments(const QuantilePoint& f) {
    if (f.grid_size() == 0) throw InvalidInput("quantile_moments: empty grid");
    const double mean = f.values.mean();
    const double var = (f.values.array() - mean).square().mean();
    return {mean, std::sqrt(var)};
}

Wasserstein2::Wasserstein2(std::size_t grid)
    : grid_(grid), z_(std::make_shared<const Eigen::VectorXd>(standard_normal_grid(grid))) {
    if (grid == 0) throw InvalidInput("wasserstein: grid size must be positive");
}

QuantilePoint Wasserstein2::gaussian(double mean, double sd) const {
    if (!(sd >= 0.0)) throw InvalidInput("gaussian quantiles need sd >= 0");
    if (sd == 0.0) return QuantilePoint{Eigen::VectorXd::Constant(Eigen::Index(grid_), mean)};
    return QuantilePoint{(mean + sd * z_->array()).matrix()};
}

void Wasserstein2::validate(const Point& f) const {
    if (f.grid_size() == 0) throw InvalidInput("wasserstein: empty grid");
    if (!f.values.allFinite()) throw InvalidInput("wasserstein: non-finite quantile value");
    for (Eigen::Index i = 1; i < f.values.size(); ++i)
        if (f.values(i) < f.values(i - 1) - kMonotoneTol)
            throw InvalidInput("wasserstein: quantile function is decreasing at index " + std::to_string(i));
}

void Wasserstein2::pull_together(Point& f, Point& g, double theta) const {
    Eigen::VectorXd& a = f.values;
    Eigen::VectorXd& b = g.values;
    for (Eigen::Index k = 0; k < a.size(); ++k) {
        const double diff = b(k) - a(k);
        a(k) += theta * diff;
        b(k) = theta == 0.5 ? a(k) : b(k) - theta * diff;
    }
}

}  // namespace tvfr
