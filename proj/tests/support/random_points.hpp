#pragma once

// Random points for property tests. Everything is driven by a std::mt19937_64 so failures
// reproduce from the seed alone.

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "tvfr/euclidean.hpp"
#include "tvfr/spd.hpp"
#include "tvfr/wasserstein.hpp"

namespace tvfr::testing {

using Rng = std::mt19937_64;

inline double normal(Rng& g) { return std::normal_distribution<double>(0.0, 1.0)(g); }
inline double uniform(Rng& g, double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(g);
}

inline VecPoint random_vec(Rng& g, Eigen::Index k, double sd = 1.0) {
    VecPoint p(k);
    for (Eigen::Index i = 0; i < k; ++i) p(i) = sd * normal(g);
    return p;
}

inline Eigen::MatrixXd random_symmetric(Rng& g, Eigen::Index m, double sd = 1.0) {
    Eigen::MatrixXd a(m, m);
    for (Eigen::Index j = 0; j < m; ++j)
        for (Eigen::Index i = j; i < m; ++i) a(i, j) = a(j, i) = sd * normal(g);
    return a;
}

// Q diag(e^{spread·z}) Q^T with Haar-ish Q from a QR factorization; condition numbers up
// to roughly e^{4·spread}.
inline SpdPoint random_spd(Rng& g, Eigen::Index m, double spread = 0.7) {
    Eigen::MatrixXd z(m, m);
    for (Eigen::Index j = 0; j < m; ++j)
        for (Eigen::Index i = 0; i < m; ++i) z(i, j) = normal(g);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(z);
    const Eigen::MatrixXd q = qr.householderQ();
    Eigen::VectorXd ev(m);
    for (Eigen::Index i = 0; i < m; ++i) ev(i) = std::exp(spread * normal(g));
    Eigen::MatrixXd a = q * ev.asDiagonal() * q.transpose();
    return 0.5 * (a + a.transpose());
}

inline Eigen::MatrixXd random_invertible(Rng& g, Eigen::Index m) {
    Eigen::MatrixXd a(m, m);
    for (Eigen::Index j = 0; j < m; ++j)
        for (Eigen::Index i = 0; i < m; ++i) a(i, j) = normal(g);
    return a + 2.0 * Eigen::MatrixXd::Identity(m, m);
}

// A random nondecreasing quantile grid: Gaussian quantiles plus a random monotone ramp.
inline QuantilePoint random_quantile(Rng& g, const Wasserstein2& space) {
    const auto& z = space.standard_normal_quantiles();
    Eigen::VectorXd v(z.size());
    const double mean = 2.0 * normal(g), sd = std::exp(0.5 * normal(g)), tilt = std::abs(normal(g));
    double ramp = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        ramp += tilt * uniform(g) / double(v.size());
        v(i) = mean + sd * z(i) + ramp;
    }
    return QuantilePoint{v};
}

}  // namespace tvfr::testing
