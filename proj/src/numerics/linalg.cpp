#include "latocc/numerics/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "latocc/errors.hpp"

namespace latocc {

SymMatrix::SymMatrix(std::size_t order) : m_(Eigen::MatrixXd::Zero(order, order)) {}

SymMatrix SymMatrix::identity(std::size_t order) {
    SymMatrix out(order);
    out.m_.setIdentity();
    return out;
}

SymMatrix SymMatrix::from_dense(const Eigen::MatrixXd& m, double tol) {
    if (m.rows() != m.cols()) {
        throw DomainError("SymMatrix: matrix is not square");
    }
    const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (!(asym <= tol)) {
        std::ostringstream msg;
        msg << "SymMatrix: asymmetry " << asym << " exceeds tolerance " << tol;
        throw DomainError(msg.str());
    }
    SymMatrix out;
    out.m_ = 0.5 * (m + m.transpose());
    return out;
}

void SymMatrix::set(std::size_t i, std::size_t j, double v) {
    m_(i, j) = v;
    m_(j, i) = v;
}

EigenPair sym_eigen(const SymMatrix& m) {
    const Eigen::Index n = static_cast<Eigen::Index>(m.order());
    if (!m.dense().allFinite()) {
        throw DomainError("sym_eigen: matrix has non-finite entries");
    }
    Eigen::MatrixXd a = m.dense();
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);

    const double scale = std::max(a.norm(), 1e-300);
    constexpr int max_sweeps = 100;
    int sweep = 0;
    for (; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                off += a(p, q) * a(p, q);
            }
        }
        if (std::sqrt(off) <= 1e-15 * scale) {
            break;
        }
        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) {
                    continue;
                }
                if (std::abs(apq) < 1e-20 * scale) {
                    a(p, q) = 0.0;
                    a(q, p) = 0.0;
                    continue;
                }
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (Eigen::Index k = 0; k < n; ++k) {
                    if (k == p || k == q) {
                        continue;
                    }
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = a(p, k) = c * akp - s * akq;
                    a(k, q) = a(q, k) = s * akp + c * akq;
                }
                a(p, p) -= t * apq;
                a(q, q) += t * apq;
                a(p, q) = a(q, p) = 0.0;

                for (Eigen::Index k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    if (sweep == max_sweeps) {
        throw DomainError("sym_eigen: Jacobi iteration did not converge");
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index i, Eigen::Index j) { return a(i, i) > a(j, j); });

    EigenPair out{Eigen::MatrixXd(n, n), Eigen::VectorXd(n)};
    for (Eigen::Index j = 0; j < n; ++j) {
        const Eigen::Index src = order[static_cast<std::size_t>(j)];
        out.values(j) = a(src, src);
        out.vectors.col(j) = v.col(src);
    }
    return out;
}

Eigen::MatrixXd cholesky(const SymMatrix& m) {
    const Eigen::Index n = static_cast<Eigen::Index>(m.order());
    const Eigen::MatrixXd& a = m.dense();
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        double diag = a(j, j);
        for (Eigen::Index k = 0; k < j; ++k) {
            diag -= l(j, k) * l(j, k);
        }
        if (!(diag > 0.0)) {
            std::ostringstream msg;
            msg << "cholesky: matrix is not positive definite (pivot " << j
                << " = " << diag << ")";
            throw FactorizationError(msg.str(), static_cast<std::size_t>(j));
        }
        const double ljj = std::sqrt(diag);
        l(j, j) = ljj;
        for (Eigen::Index i = j + 1; i < n; ++i) {
            double sum = a(i, j);
            for (Eigen::Index k = 0; k < j; ++k) {
                sum -= l(i, k) * l(j, k);
            }
            l(i, j) = sum / ljj;
        }
    }
    return l;
}

Eigen::MatrixXd cholesky_solve(const Eigen::MatrixXd& lower, const Eigen::MatrixXd& rhs) {
    const auto tri = lower.triangularView<Eigen::Lower>();
    Eigen::MatrixXd y = tri.solve(rhs);
    return tri.transpose().solve(y);
}

double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    if (a.size() == 0) {
        return 0.0;
    }
    return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace latocc
