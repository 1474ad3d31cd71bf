#include "latocc/model/model_io.hpp"

#include <cmath>

#include "latocc/errors.hpp"
#include "latocc/io.hpp"

namespace latocc {

using json = nlohmann::ordered_json;

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty()) {
        throw DataError("model: matrix must be a non-empty array of rows");
    }
    const auto n = static_cast<Eigen::Index>(j.size());
    const auto c = static_cast<Eigen::Index>(j[0].size());
    Eigen::MatrixXd m(n, c);
    for (Eigen::Index i = 0; i < n; ++i) {
        const json& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != c) {
            throw DataError("model: ragged matrix row " + std::to_string(i));
        }
        for (Eigen::Index k = 0; k < c; ++k) {
            const json& v = row[static_cast<std::size_t>(k)];
            if (!v.is_number()) {
                throw DataError("model: non-numeric matrix entry");
            }
            m(i, k) = v.get<double>();
        }
    }
    return m;
}

namespace {

json cov_to_json(const FullCovariance& c) {
    json j;
    j["matrix"] = matrix_to_json(c.matrix.dense());
    j["adjusted"] = c.adjusted;
    j["eps1"] = c.eps1;
    j["eps2"] = c.eps2;
    return j;
}

FullCovariance cov_from_json(const json& j, unsigned month, std::size_t s, std::size_t r) {
    FullCovariance c;
    c.month = month;
    c.n_sites = s;
    c.max_lag = r;
    const Eigen::MatrixXd m = matrix_from_json(j.at("matrix"));
    const auto order = static_cast<Eigen::Index>(s * (r + 1));
    if (m.rows() != order || m.cols() != order) {
        throw DataError("model: month " + std::to_string(month) + " matrix has order " +
                        std::to_string(m.rows()) + ", expected " + std::to_string(order));
    }
    if (!m.allFinite()) {
        throw DataError("model: month " + std::to_string(month) + " matrix has non-finite entries");
    }
    try {
        c.matrix = SymMatrix::from_dense(m, 0.0);
    } catch (const DomainError&) {
        throw DataError("model: month " + std::to_string(month) + " matrix is not symmetric");
    }
    c.adjusted = j.at("adjusted").get<bool>();
    c.eps1 = j.at("eps1").get<double>();
    c.eps2 = j.at("eps2").get<double>();
    return c;
}

}  // namespace

json model_to_json(const FittedModel& model) {
    json doc;
    doc["format"] = "latocc-model";
    doc["format_version"] = kModelFormatVersion;
    doc["sites"] = model.sites;
    doc["max_lag"] = model.max_lag;
    doc["wet_threshold_mm"] = model.wet_threshold_mm;

    json p = json::array();
    json c = json::array();
    for (std::size_t i = 0; i < model.n_sites(); ++i) {
        json prow = json::array();
        json crow = json::array();
        for (unsigned m = 1; m <= 12; ++m) {
            prow.push_back(model.marginals.p_hat(i, m));
            crow.push_back(model.marginals.c_hat(i, m));
        }
        p.push_back(std::move(prow));
        c.push_back(std::move(crow));
    }
    doc["marginals"] = {{"p_hat", std::move(p)}, {"c_hat", std::move(c)}};

    json months = json::array();
    for (unsigned m = 1; m <= 12; ++m) {
        json e;
        e["month"] = m;
        e["raw"] = cov_to_json(model.raw[m - 1]);
        e["adjusted"] = cov_to_json(model.covariances[m - 1]);
        months.push_back(std::move(e));
    }
    doc["months"] = std::move(months);

    const Provenance& pv = model.provenance;
    doc["provenance"] = {{"source", pv.source},
                         {"source_digest", pv.source_digest},
                         {"calibration_start", pv.calibration_start},
                         {"calibration_end", pv.calibration_end},
                         {"record_start", pv.record_start},
                         {"record_end", pv.record_end}};
    return doc;
}

FittedModel model_from_json(const json& doc) {
    try {
        if (doc.value("format", std::string{}) != "latocc-model") {
            throw DataError("model: not a latocc model document");
        }
        const int version = doc.at("format_version").get<int>();
        if (version != kModelFormatVersion) {
            throw DataError("model: unsupported format_version " + std::to_string(version));
        }
        FittedModel model;
        model.sites = doc.at("sites").get<std::vector<std::string>>();
        if (model.sites.empty()) {
            throw DataError("model: no sites");
        }
        model.max_lag = doc.at("max_lag").get<std::size_t>();
        model.wet_threshold_mm = doc.at("wet_threshold_mm").get<double>();
        const std::size_t s = model.sites.size();

        const json& p = doc.at("marginals").at("p_hat");
        const json& c = doc.at("marginals").at("c_hat");
        if (p.size() != s || c.size() != s) {
            throw DataError("model: marginals do not match the site count");
        }
        model.marginals = MonthlyMarginals(s);
        for (std::size_t i = 0; i < s; ++i) {
            if (p[i].size() != 12 || c[i].size() != 12) {
                throw DataError("model: marginals need 12 months per site");
            }
            for (unsigned m = 1; m <= 12; ++m) {
                const double pv = p[i][m - 1].get<double>();
                const double cv = c[i][m - 1].get<double>();
                if (!(pv > 0.0 && pv < 1.0) || !std::isfinite(cv)) {
                    throw DataError("model: invalid marginal for site " + model.sites[i] +
                                    ", month " + std::to_string(m));
                }
                model.marginals.set_raw(i, m, pv, cv);
            }
        }

        const json& months = doc.at("months");
        if (!months.is_array() || months.size() != 12) {
            throw DataError("model: expected 12 monthly entries");
        }
        for (unsigned m = 1; m <= 12; ++m) {
            const json& e = months[m - 1];
            if (e.at("month").get<unsigned>() != m) {
                throw DataError("model: monthly entries out of order");
            }
            model.raw[m - 1] = cov_from_json(e.at("raw"), m, s, model.max_lag);
            model.covariances[m - 1] = cov_from_json(e.at("adjusted"), m, s, model.max_lag);
        }

        const json& pv = doc.at("provenance");
        model.provenance.source = pv.at("source").get<std::string>();
        model.provenance.source_digest = pv.at("source_digest").get<std::string>();
        model.provenance.calibration_start = pv.at("calibration_start").get<std::string>();
        model.provenance.calibration_end = pv.at("calibration_end").get<std::string>();
        model.provenance.record_start = pv.at("record_start").get<std::string>();
        model.provenance.record_end = pv.at("record_end").get<std::string>();
        return model;
    } catch (const json::exception& e) {
        throw DataError(std::string("model: malformed document: ") + e.what());
    }
}

std::string dump_model(const FittedModel& model) { return model_to_json(model).dump(1) + "\n"; }

FittedModel parse_model(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string("model: invalid JSON: ") + e.what());
    }
    return model_from_json(doc);
}

void save_model(const std::string& path, const FittedModel& model) {
    write_file_atomic(path, dump_model(model));
}

FittedModel load_model(const std::string& path) { return parse_model(read_file(path)); }

}  // namespace latocc
