#include "tvfr/euclidean.hpp"

namespace tvfr {

namespace {

void require_same_dim(const VecPoint& p, const VecPoint& q) {
    if (p.size() != q.size())
        throw InvalidInput("euclidean: dimension mismatch (" + std::to_string(p.size()) + " vs " +
                           std::to_string(q.size()) + ")");
}

void require_unit_interval(double theta) {
    if (!(theta >= 0.0 && theta <= 1.0)) throw InvalidInput("geodesic parameter outside [0,1]");
}

}  // namespace

VecPoint EuclideanSpace::Segment::at(double theta) const {
    if (theta == 0.0) return *p_;
    if (theta == 1.0) return *q_;
    return *p_ + theta * (*q_ - *p_);
}

double EuclideanSpace::distance(const Point& p, const Point& q) const {
    require_same_dim(p, q);
    return (p - q).norm();
}

VecPoint EuclideanSpace::geodesic(const Point& p, const Point& q, double theta) const {
    require_same_dim(p, q);
    require_unit_interval(theta);
    return Segment(p, q).at(theta);
}

EuclideanSpace::Segment EuclideanSpace::segment(const Point& p, const Point& q) const {
    require_same_dim(p, q);
    return Segment(p, q);
}

void EuclideanSpace::validate(const Point& p) const {
    if (p.size() == 0) throw InvalidInput("euclidean: empty vector");
    if (!p.allFinite()) throw InvalidInput("euclidean: non-finite coordinate");
}

VecPoint EuclideanSpace::frechet_mean(std::span<const Point> points) const {
    VecPoint acc = VecPoint::Zero(points.front().size());
    for (const auto& p : points) acc += p;
    return acc / double(points.size());
}

void EuclideanSpace::pull_together(Point& p, Point& q, double theta) const {
    for (Eigen::Index k = 0; k < p.size(); ++k) {
        const double diff = q(k) - p(k);
        p(k) += theta * diff;
        q(k) = theta == 0.5 ? p(k) : q(k) - theta * diff;
    }
}

}  // namespace tvfr
