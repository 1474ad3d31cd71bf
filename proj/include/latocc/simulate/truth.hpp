#pragma once

#include <cstddef>

#include <json.hpp>

#include "latocc/model/model.hpp"

namespace latocc {

/// Built-in synthetic truth: seasonal wet probabilities
///   p(i, m) = 0.32 + 0.08 cos(2 pi (m - 1) / 12) + 0.02 (i mod 3)
/// and separable latent blocks Sigma_k = phi^k R with phi = 0.5,
/// R(u, v) = exp(-|u - v| / 3), identical in every month. Sites are S01, S02, ...
FittedModel default_truth_model(std::size_t n_sites, std::size_t max_lag,
                                double wet_threshold_mm = kDefaultWetThresholdMm);

/// Truth parameters from JSON. Accepts a saved model document, or
///   {"sites": [...], "p_wet": [[12 per site]...],
///    "lag_blocks": [Sigma_0, ..., Sigma_r]            (all months), or
///    "monthly_lag_blocks": [[Sigma_0..Sigma_r] x 12],
///    "wet_threshold_mm": 1.0 (optional)}
/// Throws EstimationError on invalid parameters, DataError on malformed input.
FittedModel truth_from_json(const nlohmann::ordered_json& doc);

}  // namespace latocc
