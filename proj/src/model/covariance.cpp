#include <cmath>
#include <sstream>

#include "latocc/errors.hpp"
#include "latocc/model/model.hpp"
#include "latocc/numerics/roots.hpp"

namespace latocc {

Eigen::MatrixXd FullCovariance::block(std::size_t i, std::size_t j) const {
    const auto s = static_cast<Eigen::Index>(n_sites);
    return matrix.dense().block(static_cast<Eigen::Index>(i) * s, static_cast<Eigen::Index>(j) * s,
                                s, s);
}

LagCorrBlocks FullCovariance::lag_blocks() const {
    LagCorrBlocks out{month, {}};
    for (std::size_t k = 0; k <= max_lag; ++k) {
        out.blocks.push_back(block(0, k));
    }
    return out;
}

FullCovariance assemble_sigma_all(const LagCorrBlocks& blocks) {
    if (blocks.blocks.empty()) {
        throw DomainError("assemble_sigma_all: no lag blocks");
    }
    const std::size_t s = blocks.n_sites();
    const std::size_t r = blocks.max_lag();
    const auto si = static_cast<Eigen::Index>(s);
    Eigen::MatrixXd m(si * static_cast<Eigen::Index>(r + 1), si * static_cast<Eigen::Index>(r + 1));
    for (std::size_t i = 0; i <= r; ++i) {
        for (std::size_t j = i; j <= r; ++j) {
            const Eigen::MatrixXd& b = blocks.blocks[j - i];
            if (static_cast<std::size_t>(b.rows()) != s || static_cast<std::size_t>(b.cols()) != s) {
                throw DomainError("assemble_sigma_all: lag blocks must all be s x s");
            }
            const auto ii = static_cast<Eigen::Index>(i) * si;
            const auto jj = static_cast<Eigen::Index>(j) * si;
            m.block(ii, jj, si, si) = b;
            m.block(jj, ii, si, si) = b.transpose();
        }
    }
    FullCovariance out;
    out.month = blocks.month;
    out.n_sites = s;
    out.max_lag = r;
    out.matrix = SymMatrix::from_dense(m, 1e-12);
    return out;
}

double min_eigenvalue(const SymMatrix& m) {
    const EigenPair e = sym_eigen(m);
    return e.values(e.values.size() - 1);
}

SymMatrix eig_repair(const SymMatrix& m, double eps1, double eps2) {
    if (!(eps2 > 0.0)) {
        throw DomainError("eig_repair: eps2 must be positive");
    }
    Eigen::MatrixXd shifted = m.dense();
    shifted.array() += eps1;
    shifted.diagonal().array() -= eps1;
    const EigenPair e = sym_eigen(SymMatrix::from_dense(shifted));

    const Eigen::VectorXd floored = e.values.cwiseMax(eps2);
    const Eigen::MatrixXd rebuilt = e.vectors * floored.asDiagonal() * e.vectors.transpose();
    const Eigen::VectorXd inv_sd = rebuilt.diagonal().cwiseSqrt().cwiseInverse();
    Eigen::MatrixXd out = inv_sd.asDiagonal() * rebuilt * inv_sd.asDiagonal();
    out.diagonal().setOnes();
    return SymMatrix::from_dense(out, 1e-8);
}

FullCovariance adjust_sigma_all(const FullCovariance& cov, double eps2) {
    const SymMatrix& m = cov.matrix;
    const double total = m.dense().sum();
    auto gap = [&](double eps1) { return eig_repair(m, eps1, eps2).dense().sum() - total; };

    constexpr double kLimit = 0.5;
    constexpr double kSumTol = 1e-8;
    double eps1 = 0.0;
    const double g0 = gap(0.0);
    if (std::abs(g0) > 1e-12) {
        // Walk outward from zero in the direction that reduces the gap,
        // then polish inside the first bracket found.
        const double dir = g0 < 0.0 ? 1.0 : -1.0;
        double prev = 0.0;
        double gprev = g0;
        bool bracketed = false;
        for (double step = 1e-3; step <= 2.0 * kLimit; step *= 2.0) {
            const double x = dir * std::min(step, kLimit);
            const double gx = gap(x);
            if ((gx > 0.0) != (gprev > 0.0) || gx == 0.0) {
                eps1 = find_root(gap, std::min(prev, x), std::max(prev, x),
                                 RootOptions{1e-16, 1e-11, 400});
                bracketed = true;
                break;
            }
            prev = x;
            gprev = gx;
            if (std::abs(x) >= kLimit) break;
        }
        if (!bracketed) {
            std::ostringstream msg;
            msg << "month " << cov.month << ": eps1 root not bracketed in [-" << kLimit << ", "
                << kLimit << "] (entry-sum gap at 0 = " << g0 << ", at " << dir * kLimit << " = "
                << gap(dir * kLimit) << ")";
            throw AdjustmentError(msg.str());
        }
    }

    FullCovariance out = cov;
    out.matrix = eig_repair(m, eps1, eps2);
    out.adjusted = true;
    out.eps1 = eps1;
    out.eps2 = eps2;
    const double residual = out.matrix.dense().sum() - total;
    if (!(std::abs(residual) <= kSumTol)) {
        std::ostringstream msg;
        msg << "month " << cov.month << ": adjusted entry-sum gap " << residual
            << " exceeds tolerance (eps1 = " << eps1 << ")";
        throw AdjustmentError(msg.str());
    }
    if (!(min_eigenvalue(out.matrix) > 0.0)) {
        throw AdjustmentError("month " + std::to_string(cov.month) +
                              ": adjusted matrix is not positive definite");
    }
    return out;
}

}  // namespace latocc
