#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace latocc {

using Date = std::chrono::year_month_day;

Date make_date(int year, unsigned month, unsigned day);
/// Parses YYYY-MM-DD. Throws DataError on malformed or invalid dates.
Date parse_date(std::string_view text);
std::string format_date(const Date& d);
/// Signed number of days from `from` to `to`.
std::int64_t days_between(const Date& from, const Date& to);
Date add_days(const Date& d, std::int64_t n);
unsigned days_in_month(int year, unsigned month);

enum class Season : std::uint8_t { Winter = 0, Spring = 1, Summer = 2, Fall = 3 };
inline constexpr std::array<Season, 4> kSeasons = {Season::Winter, Season::Spring,
                                                   Season::Summer, Season::Fall};
std::string_view to_string(Season s);
Season parse_season(std::string_view text);

/// Calendar month -> season assignment. Each season must be a cyclically
/// contiguous 3-month block. Months of a block that precede January in the
/// block (December for DJF) count toward the following year's season.
class SeasonMap {
public:
    /// DJF / MAM / JJA / SON.
    static SeasonMap climatological();

    /// `first_month` gives the starting month of each season's block, in
    /// Season enum order.
    explicit SeasonMap(const std::array<unsigned, 4>& first_month);

    Season season_of(unsigned month) const { return assignment_[month - 1]; }
    /// Year the (month, year) day's season is attributed to.
    int season_year(int year, unsigned month) const {
        return year + year_offset_[month - 1];
    }

private:
    std::array<Season, 12> assignment_{};
    std::array<int, 12> year_offset_{};
};

/// A contiguous run of days starting at `start`, with cached calendar fields.
class DailyCalendar {
public:
    DailyCalendar() = default;
    DailyCalendar(Date start, std::size_t n_days);

    Date start() const noexcept { return start_; }
    Date end() const;  // last day (inclusive); requires n_days > 0
    std::size_t size() const noexcept { return years_.size(); }
    Date date(std::size_t t) const;
    int year(std::size_t t) const { return years_[t]; }
    unsigned month(std::size_t t) const { return months_[t]; }
    unsigned day(std::size_t t) const { return days_[t]; }

    /// Index of `d`, or size() if outside the calendar.
    std::size_t index_of(const Date& d) const;
    bool contains(const Date& d) const { return index_of(d) < size(); }

    bool operator==(const DailyCalendar& o) const {
        return start_ == o.start_ && size() == o.size();
    }

private:
    Date start_{};
    std::vector<int> years_;
    std::vector<unsigned char> months_;
    std::vector<unsigned char> days_;
};

}  // namespace latocc
