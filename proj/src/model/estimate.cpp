#include <algorithm>
#include <cmath>
#include <sstream>

#include "latocc/errors.hpp"
#include "latocc/model/model.hpp"
#include "latocc/numerics/normal.hpp"
#include "latocc/numerics/roots.hpp"

namespace latocc {

void MonthlyMarginals::set(std::size_t site, unsigned month, double p_hat) {
    if (!(p_hat > 0.0 && p_hat < 1.0)) {
        throw DomainError("wet probability must lie in (0, 1)");
    }
    p_hat_[site * 12 + month - 1] = p_hat;
    c_hat_[site * 12 + month - 1] = std_normal_quantile(1.0 - p_hat);
}

void MonthlyMarginals::set_raw(std::size_t site, unsigned month, double p_hat, double c_hat) {
    p_hat_[site * 12 + month - 1] = p_hat;
    c_hat_[site * 12 + month - 1] = c_hat;
}

MonthlyMarginals estimate_marginals(const OccurrenceRecord& occ) {
    MonthlyMarginals out(occ.n_sites());
    std::vector<std::string> failures;
    for (unsigned month = 1; month <= 12; ++month) {
        const MonthSlice slice = month_slice(occ, month);
        for (std::size_t i = 0; i < occ.n_sites(); ++i) {
            std::size_t wet = 0;
            std::size_t dry = 0;
            for (std::size_t t : slice.days) {
                const Occurrence o = occ.state(t, i);
                wet += o == Occurrence::Wet;
                dry += o == Occurrence::Dry;
            }
            if (wet == 0 || dry == 0) {
                std::ostringstream msg;
                msg << "site " << occ.sites()[i] << ", month " << month << ": ";
                if (wet + dry == 0) {
                    msg << "no observed days";
                } else {
                    msg << (wet == 0 ? "all dry" : "all wet") << " (" << wet + dry
                        << " observed days)";
                }
                failures.push_back(msg.str());
                continue;
            }
            out.set(i, month, static_cast<double>(wet) / static_cast<double>(wet + dry));
        }
    }
    if (!failures.empty()) {
        std::string what = "degenerate marginal: " + failures.front();
        if (failures.size() > 1) {
            what += " (and " + std::to_string(failures.size() - 1) + " more)";
        }
        throw DegenerateMarginalError(what, std::move(failures));
    }
    return out;
}

PairCount count_joint_wet(const OccurrenceRecord& occ, const MonthSlice& slice, std::size_t u,
                          std::size_t v, std::size_t k) {
    PairCount out;
    for (std::size_t t : slice.days) {
        if (t < k) continue;
        const Occurrence a = occ.state(t, u);
        const Occurrence b = occ.state(t - k, v);
        if (a == Occurrence::Missing || b == Occurrence::Missing) continue;
        ++out.valid;
        out.both_wet += (a == Occurrence::Wet && b == Occurrence::Wet);
    }
    return out;
}

double estimate_joint_prob(const OccurrenceRecord& occ, std::size_t u, std::size_t v,
                           std::size_t k, unsigned month) {
    const PairCount c = count_joint_wet(occ, month_slice(occ, month), u, v, k);
    if (c.valid == 0) {
        std::ostringstream msg;
        msg << "no valid pairs for sites (" << occ.sites()[u] << ", " << occ.sites()[v]
            << "), lag " << k << ", month " << month;
        throw InsufficientDataError(msg.str());
    }
    return static_cast<double>(c.both_wet) / static_cast<double>(c.valid);
}

FrechetBounds frechet_bounds(double p_u, double p_v) {
    return {std::max(0.0, p_u + p_v - 1.0), std::min(p_u, p_v)};
}

double solve_latent_corr(double c_u, double c_v, double p_u, double p_v, double p_joint) {
    const auto [lower, upper] = frechet_bounds(p_u, p_v);
    const double pj = std::clamp(p_joint, lower, upper);
    const double target = 1.0 - p_u - p_v + pj;
    auto f = [&](double rho) { return bivariate_normal_cdf(c_u, c_v, rho) - target; };

    // f is increasing in rho; endpoints absorb targets at (or rounded past)
    // the Frechet limits.
    if (f(-kCorrBracket) >= 0.0) return -kCorrBracket;
    if (f(kCorrBracket) <= 0.0) return kCorrBracket;
    return find_root(f, -kCorrBracket, kCorrBracket, RootOptions{1e-15, 0.0, 400});
}

}  // namespace latocc
