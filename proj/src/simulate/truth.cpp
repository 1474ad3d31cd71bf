#include "latocc/simulate/truth.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "latocc/errors.hpp"
#include "latocc/model/model_io.hpp"

namespace latocc {

FittedModel default_truth_model(std::size_t n_sites, std::size_t max_lag, double wet_threshold_mm) {
    if (n_sites == 0) {
        throw EstimationError("truth model needs at least one site");
    }
    const auto s = static_cast<Eigen::Index>(n_sites);
    std::vector<std::string> sites;
    for (std::size_t i = 0; i < n_sites; ++i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "S%02zu", i + 1);
        sites.emplace_back(buf);
    }
    Eigen::MatrixXd p(s, 12);
    for (Eigen::Index i = 0; i < s; ++i) {
        for (int m = 0; m < 12; ++m) {
            p(i, m) = 0.32 + 0.08 * std::cos(2.0 * std::numbers::pi * m / 12.0) + 0.02 * static_cast<double>(i % 3);
        }
    }
    Eigen::MatrixXd r(s, s);
    for (Eigen::Index u = 0; u < s; ++u) {
        for (Eigen::Index v = 0; v < s; ++v) r(u, v) = std::exp(-std::abs(static_cast<double>(u - v)) / 3.0);
    }
    std::vector<Eigen::MatrixXd> blocks;
    for (std::size_t k = 0; k <= max_lag; ++k) blocks.push_back(std::pow(0.5, static_cast<double>(k)) * r);
    std::array<std::vector<Eigen::MatrixXd>, 12> monthly;
    monthly.fill(blocks);
    return make_truth_model(std::move(sites), p, monthly, wet_threshold_mm);
}

FittedModel truth_from_json(const nlohmann::ordered_json& doc) {
    if (!doc.is_object()) {
        throw DataError("truth: expected a JSON object");
    }
    if (doc.contains("format")) {
        FittedModel m = model_from_json(doc);
        if (!m.simulation_ready()) {
            throw EstimationError("truth: model document is not simulation-ready");
        }
        return m;
    }
    try {
        const auto sites = doc.at("sites").get<std::vector<std::string>>();
        const std::size_t s = sites.size();
        const auto& pj = doc.at("p_wet");
        if (pj.size() != s) {
            throw EstimationError("truth: p_wet needs one row per site");
        }
        Eigen::MatrixXd p(static_cast<Eigen::Index>(s), 12);
        for (std::size_t i = 0; i < s; ++i) {
            if (pj[i].size() != 12) throw EstimationError("truth: p_wet rows need 12 months");
            for (std::size_t m = 0; m < 12; ++m) {
                p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m)) = pj[i][m].get<double>();
            }
        }
        std::array<std::vector<Eigen::MatrixXd>, 12> monthly;
        auto read_blocks = [](const nlohmann::ordered_json& arr) {
            std::vector<Eigen::MatrixXd> out;
            for (const auto& b : arr) out.push_back(matrix_from_json(b));
            return out;
        };
        if (doc.contains("monthly_lag_blocks")) {
            const auto& mb = doc.at("monthly_lag_blocks");
            if (mb.size() != 12) throw EstimationError("truth: monthly_lag_blocks needs 12 entries");
            for (std::size_t m = 0; m < 12; ++m) monthly[m] = read_blocks(mb[m]);
        } else {
            monthly.fill(read_blocks(doc.at("lag_blocks")));
        }
        const double thr = doc.value("wet_threshold_mm", kDefaultWetThresholdMm);
        return make_truth_model(sites, p, monthly, thr);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("truth: malformed document: ") + e.what());
    }
}

}  // namespace latocc
