#include "tvfr/sym_eig.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <vector>

#include "tvfr/errors.hpp"

namespace tvfr {

namespace {

constexpr double kOffDiagonalTol = 1e-14;
constexpr double kSymmetryTol = 1e-10;
constexpr int kMaxSweeps = 64;
constexpr Eigen::Index kStackDim = 8;

// Cyclic Jacobi on a column-major m×m buffer. Only the strict upper triangle is kept
// current after the first rotation; the diagonal ends up holding the eigenvalues.
// Returns false if the off-diagonal mass is still above target after kMaxSweeps.
bool jacobi(double* a, double* v, Eigen::Index m, double target) {
    auto at = [m](double* x, Eigen::Index i, Eigen::Index j) -> double& { return x[i + j * m]; };
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        double off = 0.0;
        for (Eigen::Index q = 1; q < m; ++q)
            for (Eigen::Index p = 0; p < q; ++p) off += at(a, p, q) * at(a, p, q);
        if (std::sqrt(2.0 * off) <= target) return true;
        for (Eigen::Index p = 0; p < m - 1; ++p) {
            for (Eigen::Index q = p + 1; q < m; ++q) {
                const double apq = at(a, p, q);
                if (apq == 0.0) continue;
                const double app = at(a, p, p), aqq = at(a, q, q);
                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                at(a, p, p) = app - t * apq;
                at(a, q, q) = aqq + t * apq;
                at(a, p, q) = 0.0;
                for (Eigen::Index k = 0; k < m; ++k) {
                    if (k == p || k == q) continue;
                    double& akp = k < p ? at(a, k, p) : at(a, p, k);
                    double& akq = k < q ? at(a, k, q) : at(a, q, k);
                    const double x = akp, y = akq;
                    akp = c * x - s * y;
                    akq = s * x + c * y;
                }
                if (v) {
                    for (Eigen::Index k = 0; k < m; ++k) {
                        const double x = at(v, k, p), y = at(v, k, q);
                        at(v, k, p) = c * x - s * y;
                        at(v, k, q) = s * x + c * y;
                    }
                }
            }
        }
    }
    double off = 0.0;
    for (Eigen::Index q = 1; q < m; ++q)
        for (Eigen::Index p = 0; p < q; ++p) off += at(a, p, q) * at(a, p, q);
    return std::sqrt(2.0 * off) <= target;
}

}  // namespace

SymEig sym_eig_unchecked(const Eigen::MatrixXd& input, bool with_vectors) {
    const Eigen::Index m = input.rows();
    const std::size_t mm = static_cast<std::size_t>(m * m);
    std::array<double, kStackDim * kStackDim> a_small{}, v_small{};
    std::vector<double> a_big, v_big;
    double* a = a_small.data();
    double* v = v_small.data();
    if (m > kStackDim) {
        a_big.resize(mm);
        v_big.resize(mm);
        a = a_big.data();
        v = v_big.data();
    }
    std::copy(input.data(), input.data() + mm, a);
    if (with_vectors) {
        std::fill(v, v + mm, 0.0);
        for (Eigen::Index k = 0; k < m; ++k) v[k + k * m] = 1.0;
    }

    if (!jacobi(a, with_vectors ? v : nullptr, m, kOffDiagonalTol * input.norm()))
        throw ConvergenceFailure("jacobi: off-diagonal mass did not vanish", input);

    std::array<Eigen::Index, kStackDim> order_small{};
    std::vector<Eigen::Index> order_big;
    Eigen::Index* order = order_small.data();
    if (m > kStackDim) {
        order_big.resize(static_cast<std::size_t>(m));
        order = order_big.data();
    }
    std::iota(order, order + m, Eigen::Index{0});
    std::sort(order, order + m, [&](auto i, auto j) { return a[i + i * m] > a[j + j * m]; });

    SymEig out;
    out.values.resize(m);
    if (with_vectors) out.vectors.resize(m, m);
    for (Eigen::Index k = 0; k < m; ++k) {
        const Eigen::Index src = order[k];
        out.values(k) = a[src + src * m];
        if (with_vectors) std::copy(v + src * m, v + (src + 1) * m, out.vectors.data() + k * m);
    }
    return out;
}

SymEig sym_eig(const Eigen::MatrixXd& a, bool with_vectors) {
    if (a.rows() != a.cols() || a.rows() == 0) throw InvalidInput("sym_eig: matrix must be square and nonempty");
    if (!a.allFinite()) throw InvalidInput("sym_eig: non-finite entry");
    const double asym = (a - a.transpose()).norm();
    if (asym > kSymmetryTol * a.norm()) throw InvalidInput("sym_eig: matrix is not symmetric");
    return sym_eig_unchecked(a, with_vectors);
}

}  // namespace tvfr
