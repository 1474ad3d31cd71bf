#include "latocc/data/record.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "latocc/errors.hpp"

namespace latocc {

namespace {

template <typename T>
std::vector<T> slice_rows(const std::vector<T>& cells, std::size_t width, std::size_t first,
                          std::size_t count) {
    auto begin = cells.begin() + static_cast<std::ptrdiff_t>(first * width);
    return std::vector<T>(begin, begin + static_cast<std::ptrdiff_t>(count * width));
}

std::pair<std::size_t, std::size_t> window(const DailyCalendar& cal, const Date& from,
                                           const Date& to) {
    if (cal.size() == 0) {
        throw DataError("cannot slice an empty record");
    }
    const std::int64_t lo = std::max<std::int64_t>(0, days_between(cal.start(), from));
    const std::int64_t hi = std::min<std::int64_t>(static_cast<std::int64_t>(cal.size()) - 1,
                                                   days_between(cal.start(), to));
    if (hi < lo) {
        throw DataError("window " + format_date(from) + ".." + format_date(to) +
                        " does not overlap the record " + format_date(cal.start()) + ".." +
                        format_date(cal.end()));
    }
    return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi - lo + 1)};
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line, char delim) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t next = line.find(delim, pos);
        out.push_back(trim(line.substr(pos, next == std::string_view::npos ? next : next - pos)));
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return out;
}

std::string format_depth(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

// Returns the depth, kMissing, or throws ParseError.
double parse_cell(std::string_view cell, const RecordSchema& schema, std::size_t row,
                  const std::string& site) {
    if (cell.empty() || cell == "NA" || cell == "-Inf" || cell == "-inf") {
        return kMissing;
    }
    double value = 0.0;
    const char* begin = cell.data();
    const char* end = cell.data() + cell.size();
    auto res = std::from_chars(begin, end, value);
    std::string_view flag;
    if (res.ec == std::errc{}) {
        flag = std::string_view(res.ptr, static_cast<std::size_t>(end - res.ptr));
    } else {
        flag = cell;
    }
    if (!flag.empty()) {
        const bool alphabetic = std::all_of(flag.begin(), flag.end(), [](char c) {
            return std::isalpha(static_cast<unsigned char>(c));
        });
        if (!alphabetic) {
            throw ParseError("row " + std::to_string(row) + ", site " + site +
                                 ": cannot parse '" + std::string(cell) + "'",
                             row);
        }
        return flag == schema.trace_flag ? 0.0 : kMissing;
    }
    if (!std::isfinite(value) || value < 0.0) {
        throw ParseError("row " + std::to_string(row) + ", site " + site + ": invalid depth '" +
                             std::string(cell) + "'",
                         row);
    }
    return value;
}

}  // namespace

PrecipRecord::PrecipRecord(Date start, std::vector<std::string> sites, std::vector<double> depths)
    : sites_(std::move(sites)), depths_(std::move(depths)) {
    if (sites_.empty()) {
        throw DataError("record needs at least one site");
    }
    if (depths_.size() % sites_.size() != 0) {
        throw DataError("depth matrix is not a whole number of rows");
    }
    for (double v : depths_) {
        if (!is_missing(v) && !(v >= 0.0 && std::isfinite(v))) {
            throw DataError("depths must be >= 0 or missing");
        }
    }
    calendar_ = DailyCalendar(start, depths_.size() / sites_.size());
}

PrecipRecord PrecipRecord::slice(const Date& from, const Date& to) const {
    auto [first, count] = window(calendar_, from, to);
    return PrecipRecord(calendar_.date(first), sites_,
                        slice_rows(depths_, sites_.size(), first, count));
}

OccurrenceRecord::OccurrenceRecord(Date start, std::vector<std::string> sites,
                                   std::vector<Occurrence> states)
    : sites_(std::move(sites)), states_(std::move(states)) {
    if (sites_.empty()) {
        throw DataError("record needs at least one site");
    }
    if (states_.size() % sites_.size() != 0) {
        throw DataError("state matrix is not a whole number of rows");
    }
    calendar_ = DailyCalendar(start, states_.size() / sites_.size());
}

OccurrenceRecord OccurrenceRecord::slice(const Date& from, const Date& to) const {
    auto [first, count] = window(calendar_, from, to);
    return OccurrenceRecord(calendar_.date(first), sites_,
                            slice_rows(states_, sites_.size(), first, count));
}

PrecipRecord load_record(std::istream& in, const RecordSchema& schema) {
    std::string header_line;
    if (!std::getline(in, header_line)) {
        throw ParseError("empty input: missing header row", 0);
    }
    if (!header_line.empty() && header_line.back() == '\r') header_line.pop_back();
    const char delim =
        schema.delimiter != 0 ? schema.delimiter
                              : (header_line.find('\t') != std::string::npos ? '\t' : ',');
    const auto header = split(header_line, delim);

    auto find_column = [&](const std::string& name) -> std::size_t {
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (header[c] == name) return c;
        }
        throw ParseError("header has no column '" + name + "'", 0);
    };
    const std::size_t ycol = find_column(schema.year_column);
    const std::size_t mcol = find_column(schema.month_column);
    const std::size_t dcol = find_column(schema.day_column);

    std::vector<std::string> sites;
    std::vector<std::size_t> site_cols;
    if (!schema.site_columns.empty()) {
        for (const auto& name : schema.site_columns) {
            sites.push_back(name);
            site_cols.push_back(find_column(name));
        }
    } else {
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (c == ycol || c == mcol || c == dcol) continue;
            const std::string name(header[c]);
            if (std::find(schema.ignore_columns.begin(), schema.ignore_columns.end(), name) !=
                schema.ignore_columns.end()) {
                continue;
            }
            sites.push_back(name);
            site_cols.push_back(c);
        }
    }
    if (sites.empty()) {
        throw ParseError("header has no site columns", 0);
    }

    // Rows keyed by day number; input order is not assumed.
    std::map<std::int64_t, std::vector<double>> rows;
    std::string line;
    std::size_t row = 0;
    const Date epoch = make_date(1970, 1, 1);
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const auto cells = split(line, delim);
        if (cells.size() != header.size()) {
            throw ParseError("row " + std::to_string(row) + ": expected " +
                                 std::to_string(header.size()) + " fields, found " +
                                 std::to_string(cells.size()),
                             row);
        }
        int y = 0;
        unsigned m = 0;
        unsigned d = 0;
        auto parse_int = [&](std::string_view s, auto& out) {
            auto r = std::from_chars(s.data(), s.data() + s.size(), out);
            if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) {
                throw ParseError("row " + std::to_string(row) + ": bad date field '" +
                                     std::string(s) + "'",
                                 row);
            }
        };
        parse_int(cells[ycol], y);
        parse_int(cells[mcol], m);
        parse_int(cells[dcol], d);
        Date date;
        try {
            date = make_date(y, m, d);
        } catch (const DataError& e) {
            throw ParseError("row " + std::to_string(row) + ": " + e.what(), row);
        }
        std::vector<double> values;
        values.reserve(sites.size());
        for (std::size_t k = 0; k < sites.size(); ++k) {
            values.push_back(parse_cell(cells[site_cols[k]], schema, row, sites[k]));
        }
        const auto key = days_between(epoch, date);
        if (!rows.emplace(key, std::move(values)).second) {
            throw ParseError("row " + std::to_string(row) + ": duplicate date " + format_date(date),
                             row);
        }
    }
    if (rows.empty()) {
        throw ParseError("input has no data rows", row);
    }

    std::vector<double> depths;
    depths.reserve(rows.size() * sites.size());
    std::int64_t expected = rows.begin()->first;
    for (const auto& [key, values] : rows) {
        if (key != expected) {
            const std::string missing = format_date(add_days(epoch, expected));
            throw GapError("calendar gap: first missing date " + missing, missing);
        }
        depths.insert(depths.end(), values.begin(), values.end());
        ++expected;
    }
    return PrecipRecord(add_days(epoch, rows.begin()->first), std::move(sites), std::move(depths));
}

PrecipRecord load_record(const std::string& path, const RecordSchema& schema) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open record file " + path);
    }
    return load_record(in, schema);
}

void write_record(std::ostream& out, const PrecipRecord& record, char delimiter) {
    out << "year" << delimiter << "month" << delimiter << "day";
    for (const auto& s : record.sites()) out << delimiter << s;
    out << '\n';
    const auto& cal = record.calendar();
    for (std::size_t t = 0; t < record.n_days(); ++t) {
        out << cal.year(t) << delimiter << cal.month(t) << delimiter << cal.day(t);
        for (double v : record.row(t)) {
            out << delimiter << (is_missing(v) ? std::string("NA") : format_depth(v));
        }
        out << '\n';
    }
}

OccurrenceRecord binarize(const PrecipRecord& record, double wet_threshold_mm) {
    if (!(wet_threshold_mm > 0.0)) {
        throw DataError("wet threshold must be positive");
    }
    std::vector<Occurrence> states;
    states.reserve(record.depths().size());
    for (double v : record.depths()) {
        if (is_missing(v)) {
            states.push_back(Occurrence::Missing);
        } else {
            states.push_back(v >= wet_threshold_mm ? Occurrence::Wet : Occurrence::Dry);
        }
    }
    return OccurrenceRecord(record.calendar().start(), record.sites(), std::move(states));
}

void write_occurrence(std::ostream& out, const OccurrenceRecord& occ, bool as_depth) {
    const char* wet = as_depth ? "1.0" : "1";
    const char* dry = as_depth ? "0.0" : "0";
    out << "year,month,day";
    for (const auto& s : occ.sites()) out << ',' << s;
    out << '\n';
    const auto& cal = occ.calendar();
    std::string line;
    for (std::size_t t = 0; t < occ.n_days(); ++t) {
        line.clear();
        line += std::to_string(cal.year(t));
        line += ',';
        line += std::to_string(cal.month(t));
        line += ',';
        line += std::to_string(cal.day(t));
        for (std::size_t i = 0; i < occ.n_sites(); ++i) {
            line += ',';
            switch (occ.state(t, i)) {
                case Occurrence::Wet: line += wet; break;
                case Occurrence::Dry: line += dry; break;
                case Occurrence::Missing: line += "NA"; break;
            }
        }
        line += '\n';
        out << line;
    }
}

MonthSlice month_slice(const DailyCalendar& calendar, unsigned month) {
    if (month < 1 || month > 12) {
        throw DataError("month must be in 1..12, got " + std::to_string(month));
    }
    MonthSlice out{month, {}};
    for (std::size_t t = 0; t < calendar.size(); ++t) {
        if (calendar.month(t) == month) out.days.push_back(t);
    }
    return out;
}

MonthSlice month_slice(const OccurrenceRecord& occ, unsigned month) {
    return month_slice(occ.calendar(), month);
}

}  // namespace latocc
