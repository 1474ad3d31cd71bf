#pragma once

#include <cstddef>

#include <Eigen/Dense>

namespace latocc {

/// Dense symmetric matrix. Every write goes to both triangles, so
/// m(i, j) == m(j, i) holds bit-for-bit.
class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(std::size_t order);

    static SymMatrix identity(std::size_t order);

    /// Accepts a square matrix whose asymmetry is at most `tol` (max-abs)
    /// and stores the average of the two triangles.
    static SymMatrix from_dense(const Eigen::MatrixXd& m, double tol = 1e-10);

    std::size_t order() const noexcept { return static_cast<std::size_t>(m_.rows()); }
    double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }
    void set(std::size_t i, std::size_t j, double v);
    const Eigen::MatrixXd& dense() const noexcept { return m_; }

    bool operator==(const SymMatrix& other) const { return m_ == other.m_; }

private:
    Eigen::MatrixXd m_;
};

struct EigenPair {
    Eigen::MatrixXd vectors;  // columns are orthonormal eigenvectors
    Eigen::VectorXd values;   // descending
};

/// Cyclic Jacobi eigendecomposition.
EigenPair sym_eigen(const SymMatrix& m);

/// Lower Cholesky factor L with L * L^T == m. Throws FactorizationError
/// carrying the (0-based) index of the first non-positive pivot.
Eigen::MatrixXd cholesky(const SymMatrix& m);

/// Solves (L L^T) X = B given the lower factor L.
Eigen::MatrixXd cholesky_solve(const Eigen::MatrixXd& lower, const Eigen::MatrixXd& rhs);

double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

}  // namespace latocc
