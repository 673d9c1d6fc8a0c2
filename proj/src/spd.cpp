#include "tvfr/spd.hpp"

#include <cmath>
#include <string>

namespace tvfr {

namespace {

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& x) { return 0.5 * (x + x.transpose()); }

void require_square_pair(const SpdPoint& a, const SpdPoint& b) {
    if (a.rows() != a.cols() || b.rows() != b.cols())
        throw InvalidInput("spd: matrices must be square");
    if (a.rows() != b.rows())
        throw InvalidInput("spd: size mismatch (" + std::to_string(a.rows()) + " vs " +
                           std::to_string(b.rows()) + ")");
}

void require_unit_interval(double theta) {
    if (!(theta >= 0.0 && theta <= 1.0)) throw InvalidInput("geodesic parameter outside [0,1]");
}

void require_positive(const SymEig& e, const char* what) {
    if (e.values.size() == 0 || !(e.values.minCoeff() > kEigenvalueFloor))
        throw NotPositiveDefinite(std::string(what) + ": eigenvalue at or below 1e-12");
}

// Hot-path decomposition: inputs are assumed symmetric (validated on ingestion).
SymEig positive_eig(const Eigen::MatrixXd& a, const char* what) {
    SymEig e = sym_eig_unchecked(a, true);
    require_positive(e, what);
    return e;
}

struct SqrtPair {
    Eigen::MatrixXd half, inv_half;
};

SqrtPair sqrt_pair(const Eigen::MatrixXd& a) {
    const SymEig e = positive_eig(a, "spd sqrt");
    Eigen::VectorXd s = e.values.cwiseSqrt();
    return {e.vectors * s.asDiagonal() * e.vectors.transpose(),
            e.vectors * s.cwiseInverse().asDiagonal() * e.vectors.transpose()};
}

Eigen::MatrixXd log_unchecked(const Eigen::MatrixXd& a) {
    return positive_eig(a, "spd log").apply([](double x) { return std::log(x); });
}

Eigen::MatrixXd exp_unchecked(const Eigen::MatrixXd& s) {
    return sym_eig_unchecked(s, true).apply([](double x) { return std::exp(x); });
}

// A = L L^T. Any such factor works in the geodesic formula: L (L^-1 B L^-T)^θ L^T equals
// A^{1/2} (A^{-1/2} B A^{-1/2})^θ A^{1/2}, and the inner matrices share eigenvalues.
Eigen::MatrixXd cholesky_factor(const Eigen::MatrixXd& a, const char* what) {
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success) throw NotPositiveDefinite(std::string(what) + ": Cholesky factorization failed");
    return llt.matrixL();
}

// L^-1 B L^-T, symmetrized.
Eigen::MatrixXd whitened(const Eigen::MatrixXd& l, const Eigen::MatrixXd& b) {
    const auto tri = l.triangularView<Eigen::Lower>();
    const Eigen::MatrixXd x = tri.solve(b);
    return symmetrized(tri.solve(x.transpose()));
}

}  // namespace

Eigen::MatrixXd spd_log(const Eigen::MatrixXd& a) {
    SymEig e = sym_eig(a);
    require_positive(e, "spd_log");
    return e.apply([](double x) { return std::log(x); });
}

Eigen::MatrixXd spd_exp(const Eigen::MatrixXd& s) {
    return sym_eig(s).apply([](double x) { return std::exp(x); });
}

Eigen::MatrixXd spd_sqrt(const Eigen::MatrixXd& a) {
    SymEig e = sym_eig(a);
    require_positive(e, "spd_sqrt");
    return e.apply([](double x) { return std::sqrt(x); });
}

Eigen::MatrixXd spd_inv_sqrt(const Eigen::MatrixXd& a) {
    SymEig e = sym_eig(a);
    require_positive(e, "spd_inv_sqrt");
    return e.apply([](double x) { return 1.0 / std::sqrt(x); });
}

void validate_spd(const SpdPoint& a) {
    if (a.rows() == 0 || a.rows() != a.cols()) throw InvalidInput("spd: matrix must be square and nonempty");
    require_positive(sym_eig(a, false), "spd");
}

double d_ai(const SpdPoint& a, const SpdPoint& b) {
    require_square_pair(a, b);
    if (a == b) return 0.0;
    const SymEig inner = sym_eig_unchecked(whitened(cholesky_factor(a, "d_ai"), b), false);
    require_positive(inner, "d_ai");
    return std::sqrt(inner.values.array().log().square().sum());
}

double d_le(const SpdPoint& a, const SpdPoint& b) {
    require_square_pair(a, b);
    if (a == b) return 0.0;
    return (log_unchecked(a) - log_unchecked(b)).norm();
}

SpdAffineInvariant::Segment::Segment(const Point& a, const Point& b) : a_(&a), b_(&b) {
    require_square_pair(a, b);
    same_ = (a == b);
    if (same_) return;
    const Eigen::MatrixXd l = cholesky_factor(a, "spd geodesic");
    const SymEig inner = sym_eig_unchecked(whitened(l, b), true);
    require_positive(inner, "spd geodesic");
    frame_ = l * inner.vectors;
    values_ = inner.values;
    length_ = std::sqrt(values_.array().log().square().sum());
}

SpdPoint SpdAffineInvariant::Segment::at(double theta) const {
    if (theta == 0.0 || same_) return *a_;
    if (theta == 1.0) return *b_;
    const Eigen::VectorXd w = values_.unaryExpr([theta](double x) { return std::pow(x, theta); });
    return symmetrized(frame_ * w.asDiagonal() * frame_.transpose());
}

SpdAffineInvariant::Segment SpdAffineInvariant::segment(const Point& a, const Point& b) const {
    return Segment(a, b);
}

SpdPoint spd_geodesic_ai(const SpdPoint& a, const SpdPoint& b, double theta) {
    require_unit_interval(theta);
    return SpdAffineInvariant::Segment(a, b).at(theta);
}

SpdLogEuclidean::Segment::Segment(const Point& a, const Point& b) : a_(&a), b_(&b) {
    require_square_pair(a, b);
    if (a == b) return;
    log_a_ = log_unchecked(a);
    log_b_ = log_unchecked(b);
    length_ = (log_a_ - log_b_).norm();
}

SpdPoint SpdLogEuclidean::Segment::at(double theta) const {
    if (theta == 0.0 || length_ == 0.0) return *a_;
    if (theta == 1.0) return *b_;
    return symmetrized(exp_unchecked((1.0 - theta) * log_a_ + theta * log_b_));
}

SpdLogEuclidean::Segment SpdLogEuclidean::segment(const Point& a, const Point& b) const {
    return Segment(a, b);
}

SpdPoint spd_geodesic_le(const SpdPoint& a, const SpdPoint& b, double theta) {
    require_unit_interval(theta);
    return SpdLogEuclidean::Segment(a, b).at(theta);
}

SpdPoint spd_frechet_mean_le(std::span<const SpdPoint> points) {
    if (points.empty()) throw InvalidInput("spd mean of no points");
    if (points.size() == 1) return points.front();
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(points.front().rows(), points.front().cols());
    for (const auto& p : points) {
        require_square_pair(points.front(), p);
        acc += log_unchecked(p);
    }
    return symmetrized(exp_unchecked(acc / double(points.size())));
}

namespace {

Eigen::MatrixXd mean_log_map(const Eigen::MatrixXd& inv_half, std::span<const SpdPoint> points) {
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(inv_half.rows(), inv_half.cols());
    for (const auto& y : points) acc += log_unchecked(symmetrized(inv_half * y * inv_half));
    return acc / double(points.size());
}

}  // namespace

double spd_mean_log_norm(const SpdPoint& x, std::span<const SpdPoint> points) {
    if (points.empty()) throw InvalidInput("spd mean of no points");
    return mean_log_map(sqrt_pair(x).inv_half, points).norm();
}

SpdPoint spd_frechet_mean_ai(std::span<const SpdPoint> points, const KarcherOptions& opts) {
    if (points.empty()) throw InvalidInput("spd mean of no points");
    if (points.size() == 1) return points.front();
    SpdPoint x = spd_frechet_mean_le(points);
    for (int it = 0; it < opts.max_iterations; ++it) {
        const SqrtPair sp = sqrt_pair(x);
        const Eigen::MatrixXd step = mean_log_map(sp.inv_half, points);
        if (step.norm() < opts.gradient_tol) return x;
        x = symmetrized(sp.half * exp_unchecked(step) * sp.half);
    }
    throw ConvergenceFailure("karcher mean: gradient norm above tolerance after " +
                                 std::to_string(opts.max_iterations) + " iterations",
                             x);
}

}  // namespace tvfr
