#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "latocc/data/calendar.hpp"

namespace latocc {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double depth) { return std::isnan(depth); }

/// Daily multisite precipitation depths (mm). Missing cells hold NaN.
class PrecipRecord {
public:
    PrecipRecord() = default;
    /// `depths` is day-major: depths[t * sites.size() + i].
    PrecipRecord(Date start, std::vector<std::string> sites, std::vector<double> depths);

    const DailyCalendar& calendar() const noexcept { return calendar_; }
    const std::vector<std::string>& sites() const noexcept { return sites_; }
    std::size_t n_days() const noexcept { return calendar_.size(); }
    std::size_t n_sites() const noexcept { return sites_.size(); }

    double depth(std::size_t t, std::size_t i) const { return depths_[t * sites_.size() + i]; }
    std::span<const double> row(std::size_t t) const {
        return {depths_.data() + t * sites_.size(), sites_.size()};
    }
    const std::vector<double>& depths() const noexcept { return depths_; }

    /// Inclusive date window, clipped to the record. Throws DataError when
    /// the window does not overlap the record.
    PrecipRecord slice(const Date& from, const Date& to) const;

private:
    DailyCalendar calendar_;
    std::vector<std::string> sites_;
    std::vector<double> depths_;
};

enum class Occurrence : std::uint8_t { Dry = 0, Wet = 1, Missing = 2 };

/// Daily multisite wet/dry states.
class OccurrenceRecord {
public:
    OccurrenceRecord() = default;
    OccurrenceRecord(Date start, std::vector<std::string> sites, std::vector<Occurrence> states);

    const DailyCalendar& calendar() const noexcept { return calendar_; }
    const std::vector<std::string>& sites() const noexcept { return sites_; }
    std::size_t n_days() const noexcept { return calendar_.size(); }
    std::size_t n_sites() const noexcept { return sites_.size(); }

    Occurrence state(std::size_t t, std::size_t i) const { return states_[t * sites_.size() + i]; }
    const std::vector<Occurrence>& states() const noexcept { return states_; }

    OccurrenceRecord slice(const Date& from, const Date& to) const;

    bool operator==(const OccurrenceRecord& o) const {
        return calendar_ == o.calendar_ && sites_ == o.sites_ && states_ == o.states_;
    }

private:
    DailyCalendar calendar_;
    std::vector<std::string> sites_;
    std::vector<Occurrence> states_;
};

/// Column mapping for delimited input.
struct RecordSchema {
    std::string year_column = "year";
    std::string month_column = "month";
    std::string day_column = "day";
    /// Site columns to read, in order. Empty: every column that is not a
    /// date column or listed in `ignore_columns`.
    std::vector<std::string> site_columns;
    std::vector<std::string> ignore_columns = {"datenum", "serial"};
    /// Quality flag (trailing alphabetic suffix, or the whole cell) that
    /// marks a trace observation; such cells read as depth 0. Any other flag
    /// reads as missing.
    std::string trace_flag = "T";
    /// 0: detect from the header (tab if present, else comma).
    char delimiter = 0;
};

PrecipRecord load_record(std::istream& in, const RecordSchema& schema = {});
PrecipRecord load_record(const std::string& path, const RecordSchema& schema = {});

/// year,month,day,<sites...>; depths in shortest round-trip decimal form,
/// missing as NA.
void write_record(std::ostream& out, const PrecipRecord& record, char delimiter = ',');

/// WET iff depth >= wet_threshold_mm; missing stays missing.
OccurrenceRecord binarize(const PrecipRecord& record, double wet_threshold_mm);

/// Occurrence states as 1/0/NA, or as depths 1.0/0.0/NA when `as_depth`.
void write_occurrence(std::ostream& out, const OccurrenceRecord& occ, bool as_depth = false);

/// Global day indices of every day in a calendar month. Indices refer to the
/// full record, so lagged pairs can reach back across month boundaries.
struct MonthSlice {
    unsigned month = 0;
    std::vector<std::size_t> days;
};

MonthSlice month_slice(const OccurrenceRecord& occ, unsigned month);
MonthSlice month_slice(const DailyCalendar& calendar, unsigned month);

}  // namespace latocc
