#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "latocc/data/calendar.hpp"
#include "latocc/data/record.hpp"

namespace latocc {

enum class IndexKind { PctWet, LagCorr, MaxDryRun, AggTotalMean, AggTotalStd, AggTotalCorr };
enum class Scale { Month, Season, Year };

inline constexpr IndexKind kAllIndices[] = {IndexKind::PctWet,       IndexKind::LagCorr,
                                            IndexKind::MaxDryRun,    IndexKind::AggTotalMean,
                                            IndexKind::AggTotalStd,  IndexKind::AggTotalCorr};
inline constexpr Scale kAllScales[] = {Scale::Month, Scale::Season, Scale::Year};

std::string to_string(IndexKind kind);  // "PCT_WET", ...
IndexKind parse_index_kind(std::string_view text);
std::string to_string(Scale scale);     // "MONTH", ...
/// Lowercase file stem, e.g. "pct_wet".
std::string file_stem(IndexKind kind);
/// PCT_WET and MAX_DRY_RUN are compared as pooled distributions (Q-Q).
bool is_distribution_index(IndexKind kind);

// --- per-cell indices -------------------------------------------------------

/// Contiguous day range [first, last] sharing one (season, season year).
struct SeasonCell {
    Season season;
    int year;
    std::size_t first;
    std::size_t last;
};
std::vector<SeasonCell> season_cells(const DailyCalendar& cal,
                                     const SeasonMap& map = SeasonMap::climatological());

/// Wet fraction over non-missing days of the (season, year) cell; nullopt
/// when the cell has no observed day or is outside the record.
std::optional<double> pct_wet(const OccurrenceRecord& occ, Season season, int year,
                              std::size_t site,
                              const SeasonMap& map = SeasonMap::climatological());

/// Pearson (phi) correlation of O_{t,a} and O_{t-k,b} over valid pairs with
/// day t in `month`. NaN when fewer than 2 pairs or either margin is constant.
double lagged_interstation_corr(const OccurrenceRecord& occ, std::size_t a, std::size_t b,
                                std::size_t k, unsigned month);

/// Longest run of Dry; Wet and Missing both end a run.
std::size_t max_dry_run(std::span<const Occurrence> states);
std::size_t max_dry_run(const OccurrenceRecord& occ, Season season, int year, std::size_t site,
                        const SeasonMap& map = SeasonMap::climatological());

/// One aggregation period (a calendar month, a season or a year, clipped
/// to the record) with estimated wet-day totals per site.
struct PeriodTotals {
    std::string group;  // "01".."12", season name, or "ALL"
    std::string period; // e.g. "1961-01", "1961-WINTER", "1961"
    std::size_t days = 0;
    std::vector<double> totals;  // NaN where the site has no observed day
};
std::vector<PeriodTotals> period_totals(const OccurrenceRecord& occ, Scale scale,
                                        const SeasonMap& map = SeasonMap::climatological());

struct AggregateTotals {
    Scale scale = Scale::Month;
    std::vector<std::string> groups;
    std::vector<std::vector<double>> mean;  // [group][site]
    std::vector<std::vector<double>> std;   // [group][site], sample std
    std::vector<std::vector<double>> corr;  // [group][pair], pairs a < b in row order
};
AggregateTotals aggregate_totals(const OccurrenceRecord& occ, Scale scale,
                                 const SeasonMap& map = SeasonMap::climatological());

// --- series and comparison --------------------------------------------------

struct IndexValue {
    std::string label;
    std::string pool;  // pooling key for distribution indices (season name)
    double value;
};

struct IndexSeries {
    IndexKind kind = IndexKind::PctWet;
    std::vector<IndexValue> values;
    std::vector<std::string> skipped;  // diagnostics for empty cells
};

struct IndexSelection {
    std::vector<IndexKind> kinds{std::begin(kAllIndices), std::end(kAllIndices)};
    std::size_t max_lag = 2;
    std::vector<double> levels{0.05, 0.95};
};

IndexSeries compute_index(const OccurrenceRecord& occ, IndexKind kind, std::size_t max_lag = 2,
                          const SeasonMap& map = SeasonMap::climatological());

struct ComparisonRow {
    std::string label;
    double observed;
    double median;
    std::vector<double> quantiles;
};

struct EnsembleComparison {
    IndexKind kind = IndexKind::PctWet;
    std::vector<double> levels;
    IndexSeries observed;
    /// simulated[r][j]: replicate r's value behind rows[j] (its resampled
    /// rank value for Q-Q rows). NaN where undefined.
    std::vector<std::vector<double>> simulated;
    std::vector<ComparisonRow> rows;
};

/// Collects replicate series one at a time, keeping only the row-aligned
/// values, so large ensembles never hold every full series at once.
class ComparisonBuilder {
public:
    ComparisonBuilder(IndexSeries observed, std::vector<double> levels, std::size_t n_replicates);

    /// Stores replicate `id` (0 <= id < n_replicates). Safe to call
    /// concurrently for distinct ids.
    void add(std::size_t id, const IndexSeries& replicate);
    EnsembleComparison finish();

private:
    struct Pool {
        std::string name;
        std::vector<double> observed;  // ascending
        std::size_t first_row;
    };
    IndexSeries observed_;
    std::vector<double> levels_;
    std::vector<Pool> pools_;
    std::unordered_map<std::string, std::size_t> row_of_label_;
    std::vector<std::string> row_labels_;
    std::vector<double> row_observed_;
    std::vector<std::vector<double>> simulated_;
    std::vector<char> filled_;
};

/// Sample quantile with linear interpolation between order statistics
/// (h = (n-1) p). `sorted` must be ascending and non-empty.
double sorted_quantile(std::span<const double> sorted, double p);

/// Resamples an ascending sample to `n` points at plotting positions
/// (j - 0.5) / n, j = 1..n, by linear interpolation of its empirical quantile function.
/// When sizes match the sample is returned unchanged.
std::vector<double> resample_sorted(std::span<const double> sorted, std::size_t n);

/// Builds rows from precomputed series (all replicates must share `kind`).
EnsembleComparison compare_series(IndexSeries observed, std::vector<IndexSeries> simulated,
                                  const std::vector<double>& levels);

/// Throws AlignmentError unless every replicate has the observed calendar
/// and site list.
void check_alignment(const OccurrenceRecord& observed, const std::vector<OccurrenceRecord>& ensemble);

std::vector<EnsembleComparison> compare(const OccurrenceRecord& observed,
                                        const std::vector<OccurrenceRecord>& ensemble,
                                        const IndexSelection& selection = {});

// --- reports ----------------------------------------------------------------

inline constexpr int kReportFormatVersion = 1;

void write_report_csv(std::ostream& out, const EnsembleComparison& cmp);
nlohmann::ordered_json report_json(const EnsembleComparison& cmp, const std::string& period);
void write_report_svg(std::ostream& out, const EnsembleComparison& cmp, const std::string& title);

}  // namespace latocc
