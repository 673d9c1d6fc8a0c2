#pragma once

#include <span>
#include <string_view>

#include <Eigen/Dense>

#include "tvfr/metric_space.hpp"

namespace tvfr {

using VecPoint = Eigen::VectorXd;

// R^k with the Euclidean norm. Geodesics are straight segments.
class EuclideanSpace {
public:
    using Point = VecPoint;

    class Segment {
    public:
        Segment(const Point& p, const Point& q) : p_(&p), q_(&q), len_((q - p).norm()) {}
        double length() const noexcept { return len_; }
        Point at(double theta) const;

    private:
        const Point* p_;
        const Point* q_;
        double len_;
    };

    static constexpr std::string_view name() { return "euclidean"; }

    double distance(const Point& p, const Point& q) const;
    Point geodesic(const Point& p, const Point& q, double theta) const;
    Segment segment(const Point& p, const Point& q) const;
    Shape shape(const Point& p) const { return {std::size_t(p.size()), 1}; }
    void validate(const Point& p) const;
    Point frechet_mean(std::span<const Point> points) const;

    void move_toward(Point& p, const Point& q, double theta) const { p += theta * (q - p); }
    void pull_together(Point& p, Point& q, double theta) const;
};

}  // namespace tvfr
