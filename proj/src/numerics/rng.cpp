#include "latocc/numerics/rng.hpp"

#include <cmath>

#include "latocc/errors.hpp"

namespace latocc {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
    std::uint64_t key = seed;
    const std::uint64_t seed_hash = splitmix64(key);
    std::uint64_t origin = seed_hash ^ (stream_id * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL);
    origin = splitmix64(origin);
    for (auto& word : state_) {
        word = splitmix64(origin);
    }
}

std::uint64_t RngStream::next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double RngStream::uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u;
    double v;
    double s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
}

Eigen::VectorXd mvn_sample_factored(const Eigen::VectorXd& mean, const Eigen::MatrixXd& lower,
                                    RngStream& rng) {
    if (mean.size() != lower.rows()) {
        throw DomainError("mvn_sample: mean length does not match covariance order");
    }
    Eigen::VectorXd z(mean.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        z(i) = rng.normal();
    }
    return mean + lower.triangularView<Eigen::Lower>() * z;
}

Eigen::VectorXd mvn_sample(const Eigen::VectorXd& mean, const SymMatrix& cov, RngStream& rng) {
    if (static_cast<std::size_t>(mean.size()) != cov.order()) {
        throw DomainError("mvn_sample: mean length does not match covariance order");
    }
    return mvn_sample_factored(mean, cholesky(cov), rng);
}

}  // namespace latocc
