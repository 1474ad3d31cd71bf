#include "latocc/simulate/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "latocc/errors.hpp"

namespace latocc {

void SimulationConfig::validate(std::size_t max_lag) const {
    if (n_replicates == 0) {
        throw SimulationError("n_replicates must be positive");
    }
    if (days_between(start, end) < static_cast<std::int64_t>(max_lag)) {
        throw SimulationError("simulation span " + format_date(start) + " .. " + format_date(end) +
                              " is shorter than max_lag + 1 = " + std::to_string(max_lag + 1) +
                              " days");
    }
}

std::size_t SimulationConfig::n_days() const {
    return static_cast<std::size_t>(days_between(start, end) + 1);
}

namespace {

MonthSampler prepare_month(const FullCovariance& cov) {
    const auto s = static_cast<Eigen::Index>(cov.n_sites);
    const auto sr = static_cast<Eigen::Index>(cov.n_sites * cov.max_lag);
    const Eigen::MatrixXd& full = cov.matrix.dense();
    MonthSampler out;
    try {
        out.joint_lower = cholesky(cov.matrix);
    } catch (const FactorizationError& e) {
        throw SimulationError("month " + std::to_string(cov.month) +
                              ": stacked covariance is not positive definite (" + e.what() + ")");
    }
    const Eigen::MatrixXd s0 = full.topLeftCorner(s, s);
    if (sr == 0) {
        out.cond_coeff = Eigen::MatrixXd::Zero(s, 0);
        out.cond_cov = SymMatrix::from_dense(s0, 0.0);
    } else {
        // Sigma22 is a trailing principal block of a PD matrix, so it
        // factorizes whenever the whole matrix did.
        const Eigen::MatrixXd s21 = full.bottomLeftCorner(sr, s);
        const Eigen::MatrixXd l22 = cholesky(SymMatrix::from_dense(full.bottomRightCorner(sr, sr), 0.0));
        const Eigen::MatrixXd x = cholesky_solve(l22, s21);  // Sigma22^-1 Sigma21
        out.cond_coeff = x.transpose();
        const Eigen::MatrixXd c = s0 - s21.transpose() * x;
        out.cond_cov = SymMatrix::from_dense(0.5 * (c + c.transpose()), 0.0);
    }
    try {
        out.cond_lower = cholesky(out.cond_cov);
    } catch (const FactorizationError&) {
        throw SimulationError("month " + std::to_string(cov.month) +
                              ": conditional covariance is not positive definite");
    }
    return out;
}

}  // namespace

Simulator::Simulator(FittedModel model) : model_(std::move(model)) {
    if (!model_.simulation_ready()) {
        throw SimulationError("model is not simulation-ready (needs 12 adjusted covariances)");
    }
    for (unsigned m = 1; m <= 12; ++m) {
        samplers_[m - 1] = prepare_month(model_.covariance(m));
    }
}

std::vector<Eigen::VectorXd> Simulator::init_block(unsigned month, RngStream& rng) const {
    const MonthSampler& ms = sampler(month);
    const auto s = static_cast<Eigen::Index>(model_.n_sites());
    const std::size_t r = model_.max_lag;
    const Eigen::VectorXd x =
        mvn_sample_factored(Eigen::VectorXd::Zero(ms.joint_lower.rows()), ms.joint_lower, rng);
    // Stacked newest first; return oldest first.
    std::vector<Eigen::VectorXd> out;
    out.reserve(r + 1);
    for (std::size_t j = 0; j <= r; ++j) {
        out.push_back(x.segment(static_cast<Eigen::Index>(r - j) * s, s));
    }
    return out;
}

Eigen::VectorXd Simulator::cond_step(unsigned month, const LatentState& state, RngStream& rng) const {
    const MonthSampler& ms = sampler(month);
    const auto s = static_cast<Eigen::Index>(model_.n_sites());
    if (state.history.size() != model_.max_lag) {
        throw SimulationError("latent history length " + std::to_string(state.history.size()) +
                              " does not match max_lag " + std::to_string(model_.max_lag));
    }
    Eigen::VectorXd h(s * static_cast<Eigen::Index>(model_.max_lag));
    for (std::size_t k = 0; k < state.history.size(); ++k) {
        const Eigen::VectorXd& z = state.history[k];
        if (z.size() != s || !z.allFinite()) {
            throw SimulationError("latent history entry " + std::to_string(k) + " is invalid");
        }
        h.segment(static_cast<Eigen::Index>(k) * s, s) = z;
    }
    return mvn_sample_factored(ms.cond_coeff * h, ms.cond_lower, rng);
}

Eigen::MatrixXd Simulator::simulate_latent(const DailyCalendar& cal, RngStream& rng) const {
    const std::size_t n = cal.size();
    const std::size_t r = model_.max_lag;
    const auto s = static_cast<Eigen::Index>(model_.n_sites());
    if (n < r + 1) {
        throw SimulationError("simulation span shorter than max_lag + 1 days");
    }
    // Row-major by day so each day's vector is contiguous.
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> z(
        static_cast<Eigen::Index>(n), s);
    const std::vector<Eigen::VectorXd> first = init_block(cal.month(0), rng);
    for (std::size_t t = 0; t <= r; ++t) {
        z.row(static_cast<Eigen::Index>(t)) = first[t].transpose();
    }

    const auto sr = s * static_cast<Eigen::Index>(r);
    Eigen::VectorXd h(sr);
    Eigen::VectorXd eps(s);
    for (std::size_t t = r + 1; t < n; ++t) {
        const MonthSampler& ms = sampler(cal.month(t));
        for (std::size_t k = 1; k <= r; ++k) {
            h.segment(static_cast<Eigen::Index>(k - 1) * s, s) =
                z.row(static_cast<Eigen::Index>(t - k)).transpose();
        }
        for (Eigen::Index i = 0; i < s; ++i) eps(i) = rng.normal();
        z.row(static_cast<Eigen::Index>(t)) =
            (ms.cond_coeff * h + ms.cond_lower.triangularView<Eigen::Lower>() * eps).transpose();
    }
    return z;
}

OccurrenceRecord Simulator::simulate(const SimulationConfig& config, std::uint64_t replicate_id,
                                     Eigen::MatrixXd* latents) const {
    config.validate(model_.max_lag);
    const DailyCalendar cal(config.start, config.n_days());
    RngStream rng(config.base_seed, replicate_id);
    const Eigen::MatrixXd z = simulate_latent(cal, rng);

    const std::size_t s = model_.n_sites();
    std::vector<Occurrence> states(cal.size() * s);
    for (std::size_t t = 0; t < cal.size(); ++t) {
        const unsigned m = cal.month(t);
        for (std::size_t i = 0; i < s; ++i) {
            const double zi = z(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(i));
            states[t * s + i] = zi > model_.marginals.c_hat(i, m) ? Occurrence::Wet : Occurrence::Dry;
        }
    }
    if (latents != nullptr) *latents = z;
    return OccurrenceRecord(config.start, model_.sites, std::move(states));
}

void simulate_ensemble(const Simulator& sim, const SimulationConfig& config, unsigned threads,
                       const std::function<void(std::uint64_t, OccurrenceRecord&&)>& sink) {
    config.validate(sim.model().max_lag);
    const std::uint64_t n = config.n_replicates;
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, n));

    std::atomic<std::uint64_t> next{0};
    std::atomic<bool> abort{false};
    std::mutex err_mu;
    std::uint64_t failed_id = std::numeric_limits<std::uint64_t>::max();
    std::string failed_what;

    auto worker = [&] {
        for (;;) {
            if (abort.load()) return;
            const std::uint64_t id = next.fetch_add(1);
            if (id >= n) return;
            try {
                sink(id, sim.simulate(config, id));
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(err_mu);
                if (id < failed_id) {
                    failed_id = id;
                    failed_what = e.what();
                }
                abort.store(true);
                return;
            }
        }
    };

    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (abort.load()) {
        throw SimulationError("replicate " + std::to_string(failed_id) + " failed: " + failed_what);
    }
}

std::vector<OccurrenceRecord> simulate_ensemble(const Simulator& sim, const SimulationConfig& config,
                                                unsigned threads) {
    config.validate(sim.model().max_lag);
    std::vector<OccurrenceRecord> out(config.n_replicates);
    simulate_ensemble(sim, config, threads,
                      [&](std::uint64_t id, OccurrenceRecord&& rec) { out[id] = std::move(rec); });
    return out;
}

std::vector<Eigen::VectorXd> init_block(const FittedModel& model, unsigned month, RngStream& rng) {
    return Simulator(model).init_block(month, rng);
}

Eigen::VectorXd cond_step(const FittedModel& model, unsigned month, const LatentState& state,
                          RngStream& rng) {
    return Simulator(model).cond_step(month, state, rng);
}

OccurrenceRecord simulate(const FittedModel& model, const SimulationConfig& config,
                          std::uint64_t replicate_id) {
    return Simulator(model).simulate(config, replicate_id);
}

PrecipRecord synth_record(const FittedModel& truth, int start_year, int years, std::uint64_t seed,
                          double missing_rate, OccurrenceRecord* occurrence) {
    if (years <= 0) {
        throw DataError("synth: years must be positive");
    }
    if (!(missing_rate >= 0.0 && missing_rate < 1.0)) {
        throw DataError("synth: missing_rate must lie in [0, 1)");
    }
    SimulationConfig config;
    config.start = make_date(start_year, 1, 1);
    config.end = make_date(start_year + years - 1, 12, 31);
    config.n_replicates = 1;
    config.base_seed = seed;
    const OccurrenceRecord occ = Simulator(truth).simulate(config, 0);

    // Masking draws come from their own stream so the occurrence sequence
    // matches replicate 0 of the same seed.
    RngStream mask(seed, 0xA11CE5EEDULL);
    const std::size_t s = occ.n_sites();
    std::vector<double> depths(occ.states().size());
    for (std::size_t t = 0; t < occ.n_days(); ++t) {
        for (std::size_t i = 0; i < s; ++i) {
            const double d = occ.state(t, i) == Occurrence::Wet ? 1.0 : 0.0;
            const bool drop = missing_rate > 0.0 && mask.uniform() < missing_rate;
            depths[t * s + i] = drop ? kMissing : d;
        }
    }
    if (occurrence != nullptr) *occurrence = occ;
    return PrecipRecord(config.start, occ.sites(), std::move(depths));
}

}  // namespace latocc
