#include <cmath>
#include <cstdint>
#include <limits>

#include "latocc/errors.hpp"
#include "latocc/evaluate/evaluate.hpp"

namespace latocc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string two_digit(unsigned m) {
    return (m < 10 ? "0" : "") + std::to_string(m);
}

void check_site(const OccurrenceRecord& occ, std::size_t site) {
    if (site >= occ.n_sites()) {
        throw EvaluationError("site index " + std::to_string(site) + " out of range");
    }
}

}  // namespace

std::string to_string(IndexKind kind) {
    switch (kind) {
        case IndexKind::PctWet: return "PCT_WET";
        case IndexKind::LagCorr: return "LAG_CORR";
        case IndexKind::MaxDryRun: return "MAX_DRY_RUN";
        case IndexKind::AggTotalMean: return "AGG_TOTAL_MEAN";
        case IndexKind::AggTotalStd: return "AGG_TOTAL_STD";
        case IndexKind::AggTotalCorr: return "AGG_TOTAL_CORR";
    }
    return "?";
}

IndexKind parse_index_kind(std::string_view text) {
    for (IndexKind k : kAllIndices) {
        if (text == to_string(k) || text == file_stem(k)) return k;
    }
    throw EvaluationError("unknown index '" + std::string(text) + "'");
}

std::string to_string(Scale scale) {
    switch (scale) {
        case Scale::Month: return "MONTH";
        case Scale::Season: return "SEASON";
        case Scale::Year: return "YEAR";
    }
    return "?";
}

std::string file_stem(IndexKind kind) {
    std::string s = to_string(kind);
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

bool is_distribution_index(IndexKind kind) {
    return kind == IndexKind::PctWet || kind == IndexKind::MaxDryRun;
}

std::vector<SeasonCell> season_cells(const DailyCalendar& cal, const SeasonMap& map) {
    std::vector<SeasonCell> cells;
    for (std::size_t t = 0; t < cal.size(); ++t) {
        const Season s = map.season_of(cal.month(t));
        const int y = map.season_year(cal.year(t), cal.month(t));
        if (cells.empty() || cells.back().season != s || cells.back().year != y) {
            cells.push_back({s, y, t, t});
        } else {
            cells.back().last = t;
        }
    }
    return cells;
}

namespace {

const SeasonCell* find_cell(const std::vector<SeasonCell>& cells, Season season, int year) {
    for (const SeasonCell& c : cells) {
        if (c.season == season && c.year == year) return &c;
    }
    return nullptr;
}

std::optional<double> cell_pct_wet(const OccurrenceRecord& occ, const SeasonCell& c,
                                   std::size_t site) {
    std::size_t wet = 0;
    std::size_t seen = 0;
    for (std::size_t t = c.first; t <= c.last; ++t) {
        const Occurrence o = occ.state(t, site);
        if (o == Occurrence::Missing) continue;
        ++seen;
        if (o == Occurrence::Wet) ++wet;
    }
    if (seen == 0) return std::nullopt;
    return static_cast<double>(wet) / static_cast<double>(seen);
}

std::size_t cell_dry_run(const OccurrenceRecord& occ, const SeasonCell& c, std::size_t site) {
    std::size_t best = 0;
    std::size_t run = 0;
    for (std::size_t t = c.first; t <= c.last; ++t) {
        if (occ.state(t, site) == Occurrence::Dry) {
            best = std::max(best, ++run);
        } else {
            run = 0;
        }
    }
    return best;
}

}  // namespace

std::optional<double> pct_wet(const OccurrenceRecord& occ, Season season, int year,
                              std::size_t site, const SeasonMap& map) {
    check_site(occ, site);
    const auto cells = season_cells(occ.calendar(), map);
    const SeasonCell* c = find_cell(cells, season, year);
    if (c == nullptr) return std::nullopt;
    return cell_pct_wet(occ, *c, site);
}

double lagged_interstation_corr(const OccurrenceRecord& occ, std::size_t a, std::size_t b,
                                std::size_t k, unsigned month) {
    check_site(occ, a);
    check_site(occ, b);
    if (month < 1 || month > 12) {
        throw EvaluationError("month must be 1..12, got " + std::to_string(month));
    }
    const DailyCalendar& cal = occ.calendar();
    std::int64_t n = 0, nx = 0, ny = 0, nxy = 0;
    for (std::size_t t = k; t < cal.size(); ++t) {
        if (cal.month(t) != month) continue;
        const Occurrence x = occ.state(t, a);
        const Occurrence y = occ.state(t - k, b);
        if (x == Occurrence::Missing || y == Occurrence::Missing) continue;
        const bool xw = x == Occurrence::Wet;
        const bool yw = y == Occurrence::Wet;
        ++n;
        nx += xw;
        ny += yw;
        nxy += xw && yw;
    }
    if (n < 2) return kNaN;
    const std::int64_t vx = n * nx - nx * nx;
    const std::int64_t vy = n * ny - ny * ny;
    if (vx <= 0 || vy <= 0) return kNaN;
    const double num = static_cast<double>(n * nxy - nx * ny);
    const double den = vx == vy ? static_cast<double>(vx)
                                : std::sqrt(static_cast<double>(vx)) * std::sqrt(static_cast<double>(vy));
    return num / den;
}

std::size_t max_dry_run(std::span<const Occurrence> states) {
    std::size_t best = 0;
    std::size_t run = 0;
    for (Occurrence o : states) {
        if (o == Occurrence::Dry) {
            best = std::max(best, ++run);
        } else {
            run = 0;
        }
    }
    return best;
}

std::size_t max_dry_run(const OccurrenceRecord& occ, Season season, int year, std::size_t site,
                        const SeasonMap& map) {
    check_site(occ, site);
    const auto cells = season_cells(occ.calendar(), map);
    const SeasonCell* c = find_cell(cells, season, year);
    return c == nullptr ? 0 : cell_dry_run(occ, *c, site);
}

std::vector<PeriodTotals> period_totals(const OccurrenceRecord& occ, Scale scale,
                                        const SeasonMap& map) {
    const DailyCalendar& cal = occ.calendar();
    const std::size_t s = occ.n_sites();
    struct Run {
        std::string group, period;
        std::size_t first, last;
    };
    std::vector<Run> runs;
    for (std::size_t t = 0; t < cal.size(); ++t) {
        std::string group, period;
        switch (scale) {
            case Scale::Month:
                group = two_digit(cal.month(t));
                period = std::to_string(cal.year(t)) + "-" + group;
                break;
            case Scale::Season: {
                group = std::string(to_string(map.season_of(cal.month(t))));
                period = std::to_string(map.season_year(cal.year(t), cal.month(t))) + "-" + group;
                break;
            }
            case Scale::Year:
                group = "ALL";
                period = std::to_string(cal.year(t));
                break;
        }
        if (runs.empty() || runs.back().period != period) {
            runs.push_back({std::move(group), std::move(period), t, t});
        } else {
            runs.back().last = t;
        }
    }

    std::vector<PeriodTotals> out;
    out.reserve(runs.size());
    for (const Run& r : runs) {
        PeriodTotals p;
        p.group = r.group;
        p.period = r.period;
        p.days = r.last - r.first + 1;
        p.totals.assign(s, kNaN);
        for (std::size_t i = 0; i < s; ++i) {
            std::size_t wet = 0, seen = 0;
            for (std::size_t t = r.first; t <= r.last; ++t) {
                const Occurrence o = occ.state(t, i);
                if (o == Occurrence::Missing) continue;
                ++seen;
                wet += o == Occurrence::Wet;
            }
            if (seen > 0) {
                p.totals[i] = static_cast<double>(wet) / static_cast<double>(seen) *
                              static_cast<double>(p.days);
            }
        }
        out.push_back(std::move(p));
    }
    return out;
}

namespace {

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    double mx = 0, my = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (std::isnan(x[i]) || std::isnan(y[i])) continue;
        mx += x[i];
        my += y[i];
        ++n;
    }
    if (n < 2) return kNaN;
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (std::isnan(x[i]) || std::isnan(y[i])) continue;
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) return kNaN;
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace

AggregateTotals aggregate_totals(const OccurrenceRecord& occ, Scale scale, const SeasonMap& map) {
    const std::vector<PeriodTotals> periods = period_totals(occ, scale, map);
    const std::size_t s = occ.n_sites();

    AggregateTotals out;
    out.scale = scale;
    switch (scale) {
        case Scale::Month:
            for (unsigned m = 1; m <= 12; ++m) out.groups.push_back(two_digit(m));
            break;
        case Scale::Season:
            for (Season se : kSeasons) out.groups.emplace_back(to_string(se));
            break;
        case Scale::Year:
            out.groups.emplace_back("ALL");
            break;
    }
    for (const std::string& g : out.groups) {
        std::vector<std::vector<double>> cols(s);
        for (const PeriodTotals& p : periods) {
            if (p.group != g) continue;
            for (std::size_t i = 0; i < s; ++i) cols[i].push_back(p.totals[i]);
        }
        std::vector<double> mean(s, kNaN), sd(s, kNaN);
        for (std::size_t i = 0; i < s; ++i) {
            double sum = 0;
            std::size_t n = 0;
            for (double v : cols[i]) {
                if (!std::isnan(v)) {
                    sum += v;
                    ++n;
                }
            }
            if (n == 0) continue;
            mean[i] = sum / static_cast<double>(n);
            if (n < 2) continue;
            double ss = 0;
            for (double v : cols[i]) {
                if (!std::isnan(v)) ss += (v - mean[i]) * (v - mean[i]);
            }
            sd[i] = std::sqrt(ss / static_cast<double>(n - 1));
        }
        std::vector<double> corr;
        for (std::size_t a = 0; a < s; ++a) {
            for (std::size_t b = a + 1; b < s; ++b) corr.push_back(pearson(cols[a], cols[b]));
        }
        out.mean.push_back(std::move(mean));
        out.std.push_back(std::move(sd));
        out.corr.push_back(std::move(corr));
    }
    return out;
}

IndexSeries compute_index(const OccurrenceRecord& occ, IndexKind kind, std::size_t max_lag,
                          const SeasonMap& map) {
    IndexSeries out;
    out.kind = kind;
    const auto& sites = occ.sites();
    const std::size_t s = occ.n_sites();

    switch (kind) {
        case IndexKind::PctWet:
        case IndexKind::MaxDryRun: {
            for (const SeasonCell& c : season_cells(occ.calendar(), map)) {
                const std::string season(to_string(c.season));
                for (std::size_t i = 0; i < s; ++i) {
                    std::string label = season + ";year=" + std::to_string(c.year) + ";site=" + sites[i];
                    if (kind == IndexKind::PctWet) {
                        const auto v = cell_pct_wet(occ, c, i);
                        if (!v) {
                            out.skipped.push_back(label + ": no observed days");
                            continue;
                        }
                        out.values.push_back({std::move(label), season, *v});
                    } else {
                        out.values.push_back(
                            {std::move(label), season, static_cast<double>(cell_dry_run(occ, c, i))});
                    }
                }
            }
            break;
        }
        case IndexKind::LagCorr: {
            for (std::size_t k = 0; k <= max_lag; ++k) {
                for (unsigned m = 1; m <= 12; ++m) {
                    for (std::size_t a = 0; a < s; ++a) {
                        for (std::size_t b = 0; b < s; ++b) {
                            if (k == 0 && a == b) continue;
                            out.values.push_back({"k=" + std::to_string(k) + ";month=" + two_digit(m) +
                                                      ";a=" + sites[a] + ";b=" + sites[b],
                                                  "", lagged_interstation_corr(occ, a, b, k, m)});
                        }
                    }
                }
            }
            break;
        }
        case IndexKind::AggTotalMean:
        case IndexKind::AggTotalStd:
        case IndexKind::AggTotalCorr: {
            for (Scale sc : kAllScales) {
                const AggregateTotals agg = aggregate_totals(occ, sc, map);
                for (std::size_t g = 0; g < agg.groups.size(); ++g) {
                    const std::string prefix = to_string(sc) + ";group=" + agg.groups[g];
                    if (kind == IndexKind::AggTotalCorr) {
                        std::size_t pair = 0;
                        for (std::size_t a = 0; a < s; ++a) {
                            for (std::size_t b = a + 1; b < s; ++b, ++pair) {
                                out.values.push_back({prefix + ";a=" + sites[a] + ";b=" + sites[b], "",
                                                      agg.corr[g][pair]});
                            }
                        }
                    } else {
                        const auto& v = kind == IndexKind::AggTotalMean ? agg.mean[g] : agg.std[g];
                        for (std::size_t i = 0; i < s; ++i) {
                            out.values.push_back({prefix + ";site=" + sites[i], "", v[i]});
                        }
                    }
                }
            }
            break;
        }
    }
    return out;
}

}  // namespace latocc
