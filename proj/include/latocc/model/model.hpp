#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "latocc/data/record.hpp"
#include "latocc/numerics/linalg.hpp"

namespace latocc {

inline constexpr double kDefaultWetThresholdMm = 1.0;
inline constexpr std::size_t kDefaultMaxLag = 2;
inline constexpr double kDefaultEps2 = 0.05;
/// Search interval for the latent correlation root.
inline constexpr double kCorrBracket = 1.0 - 1e-12;

/// Per (site, calendar month) wet probabilities and latent thresholds.
class MonthlyMarginals {
public:
    MonthlyMarginals() = default;
    explicit MonthlyMarginals(std::size_t n_sites)
        : n_sites_(n_sites), p_hat_(n_sites * 12, 0.0), c_hat_(n_sites * 12, 0.0) {}

    std::size_t n_sites() const noexcept { return n_sites_; }
    double p_hat(std::size_t site, unsigned month) const { return p_hat_[site * 12 + month - 1]; }
    double c_hat(std::size_t site, unsigned month) const { return c_hat_[site * 12 + month - 1]; }

    /// Sets p_hat and derives c_hat = quantile(1 - p_hat).
    void set(std::size_t site, unsigned month, double p_hat);
    /// Restores both values verbatim (deserialisation).
    void set_raw(std::size_t site, unsigned month, double p_hat, double c_hat);

    bool operator==(const MonthlyMarginals&) const = default;

private:
    std::size_t n_sites_ = 0;
    std::vector<double> p_hat_;
    std::vector<double> c_hat_;
};

/// Latent lag correlation blocks Sigma_0..Sigma_r for one month.
/// blocks[k](u, v) = Corr(Z_{t,u}, Z_{t-k,v}).
struct LagCorrBlocks {
    unsigned month = 1;
    std::vector<Eigen::MatrixXd> blocks;

    std::size_t max_lag() const { return blocks.empty() ? 0 : blocks.size() - 1; }
    std::size_t n_sites() const { return blocks.empty() ? 0 : static_cast<std::size_t>(blocks[0].rows()); }
};

/// The s(r+1)-order stacked covariance, blocks ordered most-recent-first.
struct FullCovariance {
    unsigned month = 1;
    std::size_t n_sites = 0;
    std::size_t max_lag = 0;
    SymMatrix matrix;
    bool adjusted = false;
    double eps1 = 0.0;
    double eps2 = 0.0;

    /// s x s block (i, j), 0 <= i, j <= max_lag.
    Eigen::MatrixXd block(std::size_t i, std::size_t j) const;
    /// First block row read back as lag blocks.
    LagCorrBlocks lag_blocks() const;
};

struct Provenance {
    std::string source;         // input path (relative to the output directory when possible)
    std::string source_digest;  // sha256 of the input file
    std::string calibration_start;
    std::string calibration_end;
    std::string record_start;
    std::string record_end;
    bool operator==(const Provenance&) const = default;
};

struct FittedModel {
    std::vector<std::string> sites;
    std::size_t max_lag = 0;
    double wet_threshold_mm = kDefaultWetThresholdMm;
    MonthlyMarginals marginals;
    std::array<FullCovariance, 12> raw;          // unadjusted estimates
    std::array<FullCovariance, 12> covariances;  // used for simulation
    Provenance provenance;

    std::size_t n_sites() const { return sites.size(); }
    const FullCovariance& covariance(unsigned month) const { return covariances[month - 1]; }
    bool simulation_ready() const;
};

// --- estimation ------------------------------------------------------------

/// Wet fraction and latent threshold per site-month. Throws
/// DegenerateMarginalError listing every all-wet / all-dry / empty cell.
MonthlyMarginals estimate_marginals(const OccurrenceRecord& occ);

struct PairCount {
    std::size_t both_wet = 0;
    std::size_t valid = 0;
};

/// Counts pairs (O_{t,u}, O_{t-k,v}) with day t in `month` and both non-missing.
PairCount count_joint_wet(const OccurrenceRecord& occ, const MonthSlice& slice, std::size_t u,
                          std::size_t v, std::size_t k);

/// Fraction of valid lagged pairs that are both wet. Throws
/// InsufficientDataError when there are no valid pairs.
double estimate_joint_prob(const OccurrenceRecord& occ, std::size_t u, std::size_t v,
                           std::size_t k, unsigned month);

struct FrechetBounds {
    double lower;
    double upper;
};
FrechetBounds frechet_bounds(double p_u, double p_v);

/// Latent correlation rho solving
///   Phi2(c_u, c_v | rho) = 1 - p_u - p_v + p_joint,
/// with p_joint clamped into its Frechet bounds first.
double solve_latent_corr(double c_u, double c_v, double p_u, double p_v, double p_joint);

FullCovariance assemble_sigma_all(const LagCorrBlocks& blocks);

/// Eigenvalue floor repair: eigendecompose m + eps1 (J - I), floor the
/// eigenvalues at eps2, reconstruct and rescale to unit diagonal.
SymMatrix eig_repair(const SymMatrix& m, double eps1, double eps2);

/// Picks eps1 so the repaired matrix has the same entry sum as the input.
FullCovariance adjust_sigma_all(const FullCovariance& cov, double eps2);

double min_eigenvalue(const SymMatrix& m);

// --- fitting ---------------------------------------------------------------

struct ClampEvent {
    unsigned month;
    std::size_t lag;
    std::size_t u;
    std::size_t v;
    double p_joint;
    double lower;
    double upper;
};

struct MonthDiagnostics {
    unsigned month = 1;
    double raw_min_eigenvalue = 0.0;
    double adjusted_min_eigenvalue = 0.0;
    double eps1 = 0.0;
    double eps2 = 0.0;
    double max_abs_delta = 0.0;
    double sum_delta = 0.0;
};

struct FitDiagnostics {
    std::vector<MonthDiagnostics> months;
    std::vector<ClampEvent> clamps;
};

struct FitOptions {
    std::size_t max_lag = kDefaultMaxLag;
    double eps2 = kDefaultEps2;
    double wet_threshold_mm = kDefaultWetThresholdMm;
};

struct FitResult {
    FittedModel model;
    FitDiagnostics diagnostics;
};

/// Raw lag blocks for one month. Clamp warnings are appended to `clamps`.
LagCorrBlocks estimate_lag_blocks(const OccurrenceRecord& occ, const MonthlyMarginals& marginals,
                                  unsigned month, std::size_t max_lag,
                                  std::vector<ClampEvent>* clamps = nullptr);

/// Full calibration: marginals, 12 raw covariances, 12 adjusted covariances.
FitResult fit(const OccurrenceRecord& occ, const FitOptions& options = {});

/// Builds a simulation-ready model from known parameters. `p_wet` is
/// n_sites x 12; `monthly_blocks[m]` holds Sigma_0..Sigma_r for month m+1.
/// Throws EstimationError if parameters are out of range or a month's
/// stacked matrix is not positive definite.
FittedModel make_truth_model(std::vector<std::string> sites, const Eigen::MatrixXd& p_wet,
                             const std::array<std::vector<Eigen::MatrixXd>, 12>& monthly_blocks,
                             double wet_threshold_mm = kDefaultWetThresholdMm);

}  // namespace latocc
