#pragma once

// Symmetric positive-definite matrices under the affine-invariant and Log-Euclidean
// geometries. All matrix functions go through the Jacobi eigensolver in sym_eig.hpp.

#include <span>
#include <string_view>

#include <Eigen/Dense>

#include "tvfr/metric_space.hpp"
#include "tvfr/sym_eig.hpp"

namespace tvfr {

using SpdPoint = Eigen::MatrixXd;

// Eigenvalues at or below this are rejected by log/sqrt rather than clamped.
inline constexpr double kEigenvalueFloor = 1e-12;

Eigen::MatrixXd spd_log(const Eigen::MatrixXd& a);
Eigen::MatrixXd spd_exp(const Eigen::MatrixXd& s);
Eigen::MatrixXd spd_sqrt(const Eigen::MatrixXd& a);
Eigen::MatrixXd spd_inv_sqrt(const Eigen::MatrixXd& a);

double d_ai(const SpdPoint& a, const SpdPoint& b);
double d_le(const SpdPoint& a, const SpdPoint& b);
SpdPoint spd_geodesic_ai(const SpdPoint& a, const SpdPoint& b, double theta);
SpdPoint spd_geodesic_le(const SpdPoint& a, const SpdPoint& b, double theta);

struct KarcherOptions {
    int max_iterations = 200;
    double gradient_tol = 1e-10;
};

// Karcher fixed point X <- X^{1/2} exp(mean_k log(X^{-1/2} Y_k X^{-1/2})) X^{1/2},
// started at the Log-Euclidean mean. Throws ConvergenceFailure (carrying SpdPoint).
SpdPoint spd_frechet_mean_ai(std::span<const SpdPoint> points, const KarcherOptions& opts = {});
SpdPoint spd_frechet_mean_le(std::span<const SpdPoint> points);

// Norm of the mean log-map at x; zero exactly at the affine-invariant Fréchet mean.
double spd_mean_log_norm(const SpdPoint& x, std::span<const SpdPoint> points);

void validate_spd(const SpdPoint& a);

class SpdAffineInvariant {
public:
    using Point = SpdPoint;

    class Segment {
    public:
        Segment(const Point& a, const Point& b);
        double length() const noexcept { return length_; }
        Point at(double theta) const;

    private:
        const Point* a_;
        const Point* b_;
        // With A = L L^T and L^-1 B L^-T = Q diag(values) Q^T: frame = L Q, so the
        // geodesic point at θ is frame diag(values^θ) frame^T.
        Eigen::MatrixXd frame_;
        Eigen::VectorXd values_;
        double length_ = 0.0;
        bool same_ = false;
    };

    static constexpr std::string_view name() { return "spd-ai"; }

    double distance(const Point& a, const Point& b) const { return d_ai(a, b); }
    Point geodesic(const Point& a, const Point& b, double theta) const { return spd_geodesic_ai(a, b, theta); }
    Segment segment(const Point& a, const Point& b) const;
    Shape shape(const Point& a) const { return {std::size_t(a.rows()), std::size_t(a.cols())}; }
    void validate(const Point& a) const { validate_spd(a); }
    Point frechet_mean(std::span<const Point> points) const { return spd_frechet_mean_ai(points); }
};

class SpdLogEuclidean {
public:
    using Point = SpdPoint;

    class Segment {
    public:
        Segment(const Point& a, const Point& b);
        double length() const noexcept { return length_; }
        Point at(double theta) const;

    private:
        const Point* a_;
        const Point* b_;
        Eigen::MatrixXd log_a_, log_b_;
        double length_ = 0.0;
    };

    static constexpr std::string_view name() { return "spd-le"; }

    double distance(const Point& a, const Point& b) const { return d_le(a, b); }
    Point geodesic(const Point& a, const Point& b, double theta) const { return spd_geodesic_le(a, b, theta); }
    Segment segment(const Point& a, const Point& b) const;
    Shape shape(const Point& a) const { return {std::size_t(a.rows()), std::size_t(a.cols())}; }
    void validate(const Point& a) const { validate_spd(a); }
    Point frechet_mean(std::span<const Point> points) const { return spd_frechet_mean_le(points); }
};

}  // namespace tvfr
