#pragma once

#include <array>
#include <cstdint>

#include <Eigen/Dense>

#include "latocc/numerics/linalg.hpp"

namespace latocc {

/// xoshiro256** generator keyed by (seed, stream_id).
///
/// The 256-bit state is filled from a SplitMix64 sequence whose origin mixes
/// both key words, so each stream_id gives an unrelated sequence under the
/// same seed. Plain value type: copying forks the stream.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id);

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }

    std::uint64_t next_u64();
    /// Uniform on the open interval (0, 1).
    double uniform();
    /// Standard normal (Marsaglia polar method).
    double normal();

    bool operator==(const RngStream&) const = default;

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::array<std::uint64_t, 4> state_{};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Draw from N(mean, cov).
Eigen::VectorXd mvn_sample(const Eigen::VectorXd& mean, const SymMatrix& cov, RngStream& rng);

/// Same draw given the lower Cholesky factor of cov.
Eigen::VectorXd mvn_sample_factored(const Eigen::VectorXd& mean, const Eigen::MatrixXd& lower,
                                    RngStream& rng);

}  // namespace latocc
