#include "latocc/data/calendar.hpp"

#include <charconv>
#include <cstdio>

#include "latocc/errors.hpp"

namespace latocc {

using namespace std::chrono;

Date make_date(int year, unsigned month, unsigned day) {
    Date d{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}};
    if (!d.ok()) {
        throw DataError("invalid calendar date " + std::to_string(year) + "-" +
                        std::to_string(month) + "-" + std::to_string(day));
    }
    return d;
}

Date parse_date(std::string_view text) {
    int y = 0;
    unsigned m = 0;
    unsigned d = 0;
    const char* p = text.data();
    const char* end = text.data() + text.size();
    auto bad = [&]() { return DataError("malformed date '" + std::string(text) + "'"); };
    auto r = std::from_chars(p, end, y);
    if (r.ec != std::errc{} || r.ptr == end || *r.ptr != '-') throw bad();
    r = std::from_chars(r.ptr + 1, end, m);
    if (r.ec != std::errc{} || r.ptr == end || *r.ptr != '-') throw bad();
    r = std::from_chars(r.ptr + 1, end, d);
    if (r.ec != std::errc{} || r.ptr != end) throw bad();
    return make_date(y, m, d);
}

std::string format_date(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                  static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
    return buf;
}

std::int64_t days_between(const Date& from, const Date& to) {
    return (sys_days{to} - sys_days{from}).count();
}

Date add_days(const Date& d, std::int64_t n) {
    return Date{sys_days{d} + std::chrono::days{n}};
}

unsigned days_in_month(int year, unsigned month) {
    return static_cast<unsigned>(
        (year_month_day_last{std::chrono::year{year}, month_day_last{std::chrono::month{month}}})
            .day());
}

std::string_view to_string(Season s) {
    switch (s) {
        case Season::Winter: return "WINTER";
        case Season::Spring: return "SPRING";
        case Season::Summer: return "SUMMER";
        case Season::Fall: return "FALL";
    }
    return "?";
}

Season parse_season(std::string_view text) {
    for (Season s : kSeasons) {
        if (to_string(s) == text) return s;
    }
    throw DataError("unknown season '" + std::string(text) + "'");
}

SeasonMap SeasonMap::climatological() { return SeasonMap({12, 3, 6, 9}); }

SeasonMap::SeasonMap(const std::array<unsigned, 4>& first_month) {
    std::array<int, 12> hits{};
    for (std::size_t s = 0; s < 4; ++s) {
        const unsigned first = first_month[s];
        if (first < 1 || first > 12) {
            throw DataError("SeasonMap: month out of range");
        }
        for (unsigned k = 0; k < 3; ++k) {
            const unsigned m = (first - 1 + k) % 12 + 1;
            ++hits[m - 1];
            assignment_[m - 1] = static_cast<Season>(s);
            // A block wrapping past December attributes its early months
            // to the next year.
            year_offset_[m - 1] = (first + k > 12 || first + 2 <= 12) ? 0 : 1;
        }
    }
    for (int h : hits) {
        if (h != 1) {
            throw DataError("SeasonMap: every month must belong to exactly one season");
        }
    }
}

DailyCalendar::DailyCalendar(Date start, std::size_t n_days) : start_(start) {
    years_.reserve(n_days);
    months_.reserve(n_days);
    days_.reserve(n_days);
    sys_days cur{start};
    for (std::size_t t = 0; t < n_days; ++t, cur += std::chrono::days{1}) {
        const Date d{cur};
        years_.push_back(static_cast<int>(d.year()));
        months_.push_back(static_cast<unsigned char>(static_cast<unsigned>(d.month())));
        days_.push_back(static_cast<unsigned char>(static_cast<unsigned>(d.day())));
    }
}

Date DailyCalendar::end() const { return add_days(start_, static_cast<std::int64_t>(size()) - 1); }

Date DailyCalendar::date(std::size_t t) const {
    return Date{std::chrono::year{years_[t]}, std::chrono::month{months_[t]},
                std::chrono::day{days_[t]}};
}

std::size_t DailyCalendar::index_of(const Date& d) const {
    const std::int64_t off = days_between(start_, d);
    if (off < 0 || static_cast<std::size_t>(off) >= size()) return size();
    return static_cast<std::size_t>(off);
}

}  // namespace latocc
