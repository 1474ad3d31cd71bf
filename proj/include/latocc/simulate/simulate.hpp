#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "latocc/data/calendar.hpp"
#include "latocc/data/record.hpp"
#include "latocc/model/model.hpp"
#include "latocc/numerics/rng.hpp"

namespace latocc {

struct SimulationConfig {
    Date start;
    Date end;
    std::size_t n_replicates = 1000;
    std::uint64_t base_seed = 0;

    /// Throws SimulationError unless the span holds at least max_lag + 1 days
    /// and n_replicates > 0.
    void validate(std::size_t max_lag) const;
    std::size_t n_days() const;
};

/// Last r latent vectors, most recent first: history[0] = Z_{t-1}.
struct LatentState {
    std::vector<Eigen::VectorXd> history;
};

/// Per-month sampling quantities, computed once.
struct MonthSampler {
    Eigen::MatrixXd joint_lower;  // Cholesky factor of the stacked covariance
    Eigen::MatrixXd cond_coeff;   // s x (s r): Sigma12 Sigma22^-1
    SymMatrix cond_cov;           // Sigma0 - Sigma12 Sigma22^-1 Sigma21
    Eigen::MatrixXd cond_lower;
};

class Simulator {
public:
    /// Prepares the month caches. Throws SimulationError if the model is not
    /// simulation-ready or a month's conditional covariance is not PD.
    explicit Simulator(FittedModel model);

    const FittedModel& model() const noexcept { return model_; }
    const MonthSampler& sampler(unsigned month) const { return samplers_[month - 1]; }

    /// One draw of r+1 consecutive latent vectors, oldest first.
    std::vector<Eigen::VectorXd> init_block(unsigned month, RngStream& rng) const;

    /// Next latent vector given the history.
    Eigen::VectorXd cond_step(unsigned month, const LatentState& state, RngStream& rng) const;

    /// One replicate over the configured span. If `latents` is non-null it
    /// receives the n_days x s latent values behind the returned states.
    OccurrenceRecord simulate(const SimulationConfig& config, std::uint64_t replicate_id,
                              Eigen::MatrixXd* latents = nullptr) const;

    /// Latent path only (no thresholding), n_days x s, stream as simulate().
    Eigen::MatrixXd simulate_latent(const DailyCalendar& cal, RngStream& rng) const;

private:
    FittedModel model_;
    std::array<MonthSampler, 12> samplers_;
};

/// Replicates 0..n-1 across `threads` workers (0 = hardware concurrency),
/// returned in replicate order.
std::vector<OccurrenceRecord> simulate_ensemble(const Simulator& sim, const SimulationConfig& config,
                                                unsigned threads = 0);

/// Streaming variant: `sink(id, record)` is called once per replicate, from
/// worker threads and in no particular order. On failure the lowest failing
/// replicate id is reported in the thrown SimulationError.
void simulate_ensemble(const Simulator& sim, const SimulationConfig& config, unsigned threads,
                       const std::function<void(std::uint64_t, OccurrenceRecord&&)>& sink);

std::vector<Eigen::VectorXd> init_block(const FittedModel& model, unsigned month, RngStream& rng);
Eigen::VectorXd cond_step(const FittedModel& model, unsigned month, const LatentState& state,
                          RngStream& rng);
OccurrenceRecord simulate(const FittedModel& model, const SimulationConfig& config,
                          std::uint64_t replicate_id);

/// Synthetic depth record drawn from a truth model: Wet -> 1.0 mm, Dry ->
/// 0.0 mm, then each cell goes missing independently with probability
/// `missing_rate`. `occurrence` (optional) receives the states before masking.
PrecipRecord synth_record(const FittedModel& truth, int start_year, int years, std::uint64_t seed,
                          double missing_rate, OccurrenceRecord* occurrence = nullptr);

}  // namespace latocc
