#include <cmath>
#include <sstream>

#include "latocc/errors.hpp"
#include "latocc/model/model.hpp"
#include "latocc/numerics/normal.hpp"

namespace latocc {

bool FittedModel::simulation_ready() const {
    if (sites.empty() || marginals.n_sites() != sites.size()) return false;
    for (unsigned m = 1; m <= 12; ++m) {
        const FullCovariance& c = covariances[m - 1];
        if (!c.adjusted || c.month != m || c.n_sites != sites.size() || c.max_lag != max_lag ||
            c.matrix.order() != sites.size() * (max_lag + 1)) {
            return false;
        }
    }
    return true;
}

LagCorrBlocks estimate_lag_blocks(const OccurrenceRecord& occ, const MonthlyMarginals& marginals,
                                  unsigned month, std::size_t max_lag,
                                  std::vector<ClampEvent>* clamps) {
    const std::size_t s = occ.n_sites();
    const auto si = static_cast<Eigen::Index>(s);
    const MonthSlice slice = month_slice(occ, month);
    LagCorrBlocks out{month, {}};
    std::vector<std::string> failures;

    for (std::size_t k = 0; k <= max_lag; ++k) {
        Eigen::MatrixXd block = Eigen::MatrixXd::Zero(si, si);
        for (std::size_t u = 0; u < s; ++u) {
            for (std::size_t v = 0; v < s; ++v) {
                const auto ui = static_cast<Eigen::Index>(u);
                const auto vi = static_cast<Eigen::Index>(v);
                if (k == 0 && u == v) {
                    block(ui, vi) = 1.0;
                    continue;
                }
                if (k == 0 && v < u) {
                    block(ui, vi) = block(vi, ui);
                    continue;
                }
                const PairCount count = count_joint_wet(occ, slice, u, v, k);
                if (count.valid == 0) {
                    std::ostringstream msg;
                    msg << "sites (" << occ.sites()[u] << ", " << occ.sites()[v] << "), lag " << k
                        << ", month " << month << ": no valid pairs";
                    failures.push_back(msg.str());
                    continue;
                }
                const double p_u = marginals.p_hat(u, month);
                const double p_v = marginals.p_hat(v, month);
                const double p_joint =
                    static_cast<double>(count.both_wet) / static_cast<double>(count.valid);
                const FrechetBounds b = frechet_bounds(p_u, p_v);
                if (clamps != nullptr && (p_joint < b.lower - 1e-9 || p_joint > b.upper + 1e-9)) {
                    clamps->push_back({month, k, u, v, p_joint, b.lower, b.upper});
                }
                block(ui, vi) = solve_latent_corr(marginals.c_hat(u, month),
                                                  marginals.c_hat(v, month), p_u, p_v, p_joint);
            }
        }
        out.blocks.push_back(std::move(block));
    }
    if (!failures.empty()) {
        throw InsufficientDataError("insufficient data: " + failures.front(), std::move(failures));
    }
    return out;
}

FitResult fit(const OccurrenceRecord& occ, const FitOptions& options) {
    if (!(options.eps2 > 0.0)) {
        throw EstimationError("eps2 must be positive");
    }
    FitResult result;
    FittedModel& model = result.model;
    model.sites = occ.sites();
    model.max_lag = options.max_lag;
    model.wet_threshold_mm = options.wet_threshold_mm;
    model.marginals = estimate_marginals(occ);

    std::vector<std::string> failures;
    for (unsigned month = 1; month <= 12; ++month) {
        try {
            const LagCorrBlocks blocks = estimate_lag_blocks(occ, model.marginals, month,
                                                             options.max_lag,
                                                             &result.diagnostics.clamps);
            FullCovariance raw = assemble_sigma_all(blocks);
            FullCovariance adj = adjust_sigma_all(raw, options.eps2);

            MonthDiagnostics diag;
            diag.month = month;
            diag.raw_min_eigenvalue = min_eigenvalue(raw.matrix);
            diag.adjusted_min_eigenvalue = min_eigenvalue(adj.matrix);
            diag.eps1 = adj.eps1;
            diag.eps2 = adj.eps2;
            diag.max_abs_delta = max_abs_diff(adj.matrix.dense(), raw.matrix.dense());
            diag.sum_delta = (adj.matrix.dense() - raw.matrix.dense()).sum();
            result.diagnostics.months.push_back(diag);

            model.raw[month - 1] = std::move(raw);
            model.covariances[month - 1] = std::move(adj);
        } catch (const EstimationError& e) {
            failures.insert(failures.end(), e.failures().begin(), e.failures().end());
        }
    }
    if (!failures.empty()) {
        std::string what = "estimation failed: " + failures.front();
        if (failures.size() > 1) {
            what += " (and " + std::to_string(failures.size() - 1) + " more)";
        }
        throw EstimationError(what, std::move(failures));
    }
    return result;
}

FittedModel make_truth_model(std::vector<std::string> sites, const Eigen::MatrixXd& p_wet,
                             const std::array<std::vector<Eigen::MatrixXd>, 12>& monthly_blocks,
                             double wet_threshold_mm) {
    const std::size_t s = sites.size();
    const auto si = static_cast<Eigen::Index>(s);
    if (s == 0) {
        throw EstimationError("truth model needs at least one site");
    }
    if (p_wet.rows() != si || p_wet.cols() != 12) {
        throw EstimationError("truth p_wet must be n_sites x 12");
    }
    FittedModel model;
    model.sites = std::move(sites);
    model.wet_threshold_mm = wet_threshold_mm;
    model.marginals = MonthlyMarginals(s);
    for (std::size_t i = 0; i < s; ++i) {
        for (unsigned m = 1; m <= 12; ++m) {
            const double p = p_wet(static_cast<Eigen::Index>(i), m - 1);
            if (!(p > 0.0 && p < 1.0)) {
                std::ostringstream msg;
                msg << "truth p_wet for site " << model.sites[i] << ", month " << m
                    << " must lie in (0, 1), got " << p;
                throw EstimationError(msg.str());
            }
            model.marginals.set(i, m, p);
        }
    }
    const std::size_t n_blocks = monthly_blocks[0].size();
    if (n_blocks == 0) {
        throw EstimationError("truth model needs at least the lag-0 block");
    }
    model.max_lag = n_blocks - 1;
    for (unsigned m = 1; m <= 12; ++m) {
        const auto& blocks = monthly_blocks[m - 1];
        if (blocks.size() != n_blocks) {
            throw EstimationError("truth model: every month needs the same number of lag blocks");
        }
        for (std::size_t k = 0; k < n_blocks; ++k) {
            const Eigen::MatrixXd& b = blocks[k];
            if (b.rows() != si || b.cols() != si) {
                throw EstimationError("truth model: lag blocks must be n_sites x n_sites");
            }
            if (!b.allFinite() || b.cwiseAbs().maxCoeff() > 1.0) {
                std::ostringstream msg;
                msg << "truth model month " << m << ", lag " << k
                    << ": correlations must lie in [-1, 1]";
                throw EstimationError(msg.str());
            }
        }
        const Eigen::MatrixXd& s0 = blocks[0];
        if ((s0 - s0.transpose()).cwiseAbs().maxCoeff() > 1e-12 ||
            (s0.diagonal().array() - 1.0).abs().maxCoeff() > 1e-12) {
            throw EstimationError("truth model month " + std::to_string(m) +
                                  ": lag-0 block must be symmetric with unit diagonal");
        }
        LagCorrBlocks lb{m, blocks};
        lb.blocks[0] = 0.5 * (s0 + s0.transpose());
        lb.blocks[0].diagonal().setOnes();
        FullCovariance cov = assemble_sigma_all(lb);
        try {
            (void)cholesky(cov.matrix);
        } catch (const FactorizationError&) {
            throw EstimationError("truth model month " + std::to_string(m) +
                                  ": stacked covariance is not positive definite");
        }
        model.raw[m - 1] = cov;
        cov.adjusted = true;
        model.covariances[m - 1] = std::move(cov);
    }
    return model;
}

}  // namespace latocc
