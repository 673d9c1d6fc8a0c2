#pragma once

#include <Eigen/Dense>

namespace tvfr {

// Eigendecomposition A = Q diag(values) Q^T of a real symmetric matrix, eigenvalues descending.
struct SymEig {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;  // columns are eigenvectors; empty when only values were requested

    // Q f(Λ) Q^T for a scalar function applied to the eigenvalues.
    template <class F>
    Eigen::MatrixXd apply(F&& f) const {
        Eigen::VectorXd fv = values.unaryExpr(std::forward<F>(f));
        return vectors * fv.asDiagonal() * vectors.transpose();
    }
};

// Cyclic Jacobi rotations until the off-diagonal Frobenius mass falls below 1e-14·‖A‖_F.
// Throws InvalidInput for non-square, non-finite or non-symmetric (beyond 1e-10 relative) input.
SymEig sym_eig(const Eigen::MatrixXd& a, bool with_vectors = true);

// Same, but assumes `a` is already known to be symmetric (skips validation).
SymEig sym_eig_unchecked(const Eigen::MatrixXd& a, bool with_vectors = true);

}  // namespace tvfr
