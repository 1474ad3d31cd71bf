#include <algorithm>
#include <cmath>
#include <limits>

#include "latocc/errors.hpp"
#include "latocc/evaluate/evaluate.hpp"

namespace latocc {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

double sorted_quantile(std::span<const double> sorted, double p) {
    if (sorted.empty()) {
        throw EvaluationError("quantile of an empty sample");
    }
    if (!(p >= 0.0 && p <= 1.0)) {
        throw EvaluationError("quantile level must lie in [0, 1]");
    }
    const double h = static_cast<double>(sorted.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double w = h - static_cast<double>(lo);
    if (w == 0.0) return sorted[lo];
    return sorted[lo] + w * (sorted[hi] - sorted[lo]);
}

std::vector<double> resample_sorted(std::span<const double> sorted, std::size_t n) {
    const std::size_t m = sorted.size();
    if (m == 0) {
        throw EvaluationError("cannot resample an empty sample");
    }
    if (m == n) return {sorted.begin(), sorted.end()};
    // Position (j + 0.5) / n falls at fractional index ((2j+1) m - n) / (2n)
    // of the m-point sample, whose own positions are (i + 0.5) / m.
    std::vector<double> out(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double x = (static_cast<double>(2 * j + 1) * static_cast<double>(m) - static_cast<double>(n)) /
                         (2.0 * static_cast<double>(n));
        if (x <= 0.0) {
            out[j] = sorted.front();
        } else if (x >= static_cast<double>(m - 1)) {
            out[j] = sorted.back();
        } else {
            const auto lo = static_cast<std::size_t>(std::floor(x));
            const double w = x - static_cast<double>(lo);
            out[j] = sorted[lo] + w * (sorted[lo + 1] - sorted[lo]);
        }
    }
    return out;
}

namespace {

ComparisonRow summarize(std::string label, double observed, std::vector<double> values,
                        const std::vector<double>& levels) {
    ComparisonRow row{std::move(label), observed, kNaN, std::vector<double>(levels.size(), kNaN)};
    std::erase_if(values, [](double v) { return std::isnan(v); });
    if (values.empty()) return row;
    std::sort(values.begin(), values.end());
    row.median = sorted_quantile(values, 0.5);
    for (std::size_t q = 0; q < levels.size(); ++q) row.quantiles[q] = sorted_quantile(values, levels[q]);
    return row;
}

std::vector<double> pool_values(const IndexSeries& series, const std::string& pool) {
    std::vector<double> v;
    for (const IndexValue& x : series.values) {
        if (x.pool == pool && !std::isnan(x.value)) v.push_back(x.value);
    }
    std::sort(v.begin(), v.end());
    return v;
}

}  // namespace

ComparisonBuilder::ComparisonBuilder(IndexSeries observed, std::vector<double> levels,
                                     std::size_t n_replicates)
    : observed_(std::move(observed)), levels_(std::move(levels)) {
    if (n_replicates == 0) {
        throw EvaluationError("compare: ensemble is empty");
    }
    for (double p : levels_) {
        if (!(p >= 0.0 && p <= 1.0)) throw EvaluationError("quantile levels must lie in [0, 1]");
    }
    if (is_distribution_index(observed_.kind)) {
        for (Season se : kSeasons) {
            Pool pool{std::string(to_string(se)), {}, row_labels_.size()};
            pool.observed = pool_values(observed_, pool.name);
            if (pool.observed.empty()) continue;
            for (std::size_t j = 0; j < pool.observed.size(); ++j) {
                row_labels_.push_back(pool.name + ";rank=" + std::to_string(j + 1));
                row_observed_.push_back(pool.observed[j]);
            }
            pools_.push_back(std::move(pool));
        }
    } else {
        for (const IndexValue& x : observed_.values) {
            row_of_label_.emplace(x.label, row_labels_.size());
            row_labels_.push_back(x.label);
            row_observed_.push_back(x.value);
        }
    }
    simulated_.assign(n_replicates, {});
    filled_.assign(n_replicates, 0);
}

void ComparisonBuilder::add(std::size_t id, const IndexSeries& rep) {
    if (id >= simulated_.size()) {
        throw EvaluationError("compare: replicate id " + std::to_string(id) + " out of range");
    }
    if (rep.kind != observed_.kind) {
        throw EvaluationError("compare: mixed index kinds");
    }
    std::vector<double> row(row_labels_.size(), kNaN);
    if (is_distribution_index(observed_.kind)) {
        for (const Pool& pool : pools_) {
            const std::vector<double> v = pool_values(rep, pool.name);
            if (v.empty()) {
                throw EvaluationError("replicate " + std::to_string(id) + " has no " + pool.name +
                                      " values to compare");
            }
            const std::vector<double> rs = resample_sorted(v, pool.observed.size());
            std::copy(rs.begin(), rs.end(), row.begin() + static_cast<std::ptrdiff_t>(pool.first_row));
        }
    } else {
        for (const IndexValue& x : rep.values) {
            const auto it = row_of_label_.find(x.label);
            if (it != row_of_label_.end()) row[it->second] = x.value;
        }
    }
    simulated_[id] = std::move(row);
    filled_[id] = 1;
}

EnsembleComparison ComparisonBuilder::finish() {
    for (std::size_t r = 0; r < filled_.size(); ++r) {
        if (!filled_[r]) throw EvaluationError("compare: replicate " + std::to_string(r) + " missing");
    }
    EnsembleComparison cmp;
    cmp.kind = observed_.kind;
    cmp.levels = levels_;
    cmp.rows.reserve(row_labels_.size());
    std::vector<double> vals(simulated_.size());
    for (std::size_t j = 0; j < row_labels_.size(); ++j) {
        for (std::size_t r = 0; r < simulated_.size(); ++r) vals[r] = simulated_[r][j];
        cmp.rows.push_back(summarize(row_labels_[j], row_observed_[j], vals, levels_));
    }
    cmp.observed = std::move(observed_);
    cmp.simulated = std::move(simulated_);
    return cmp;
}

EnsembleComparison compare_series(IndexSeries observed, std::vector<IndexSeries> simulated,
                                  const std::vector<double>& levels) {
    ComparisonBuilder builder(std::move(observed), levels, simulated.size());
    for (std::size_t r = 0; r < simulated.size(); ++r) builder.add(r, simulated[r]);
    return builder.finish();
}

void check_alignment(const OccurrenceRecord& observed, const std::vector<OccurrenceRecord>& ensemble) {
    for (std::size_t r = 0; r < ensemble.size(); ++r) {
        const OccurrenceRecord& e = ensemble[r];
        if (!(e.calendar() == observed.calendar())) {
            throw AlignmentError("replicate " + std::to_string(r) + " covers " +
                                 (e.n_days() ? format_date(e.calendar().start()) + " .. " +
                                                   format_date(e.calendar().end())
                                             : std::string("no days")) +
                                 ", observed covers " +
                                 (observed.n_days() ? format_date(observed.calendar().start()) + " .. " +
                                                          format_date(observed.calendar().end())
                                                    : std::string("no days")));
        }
        if (e.sites() != observed.sites()) {
            throw AlignmentError("replicate " + std::to_string(r) + " has a different site list");
        }
    }
}

std::vector<EnsembleComparison> compare(const OccurrenceRecord& observed,
                                        const std::vector<OccurrenceRecord>& ensemble,
                                        const IndexSelection& selection) {
    if (ensemble.empty()) {
        throw EvaluationError("compare: ensemble is empty");
    }
    check_alignment(observed, ensemble);
    std::vector<EnsembleComparison> out;
    for (IndexKind kind : selection.kinds) {
        std::vector<IndexSeries> sims;
        sims.reserve(ensemble.size());
        for (const OccurrenceRecord& e : ensemble) sims.push_back(compute_index(e, kind, selection.max_lag));
        out.push_back(compare_series(compute_index(observed, kind, selection.max_lag), std::move(sims),
                                     selection.levels));
    }
    return out;
}

}  // namespace latocc
