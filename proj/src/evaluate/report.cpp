#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "latocc/evaluate/evaluate.hpp"

namespace latocc {

namespace {

std::string num(double v) {
    if (std::isnan(v)) return "NA";
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::string level_name(double p) { return "q" + num(p); }

nlohmann::ordered_json json_num(double v) {
    if (!std::isfinite(v)) return nullptr;
    return v;
}

std::string fixed(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

void write_report_csv(std::ostream& out, const EnsembleComparison& cmp) {
    out << "label,observed,median";
    for (double p : cmp.levels) out << ',' << level_name(p);
    out << '\n';
    for (const ComparisonRow& row : cmp.rows) {
        out << row.label << ',' << num(row.observed) << ',' << num(row.median);
        for (double q : row.quantiles) out << ',' << num(q);
        out << '\n';
    }
}

nlohmann::ordered_json report_json(const EnsembleComparison& cmp, const std::string& period) {
    nlohmann::ordered_json doc;
    doc["format_version"] = kReportFormatVersion;
    doc["index"] = to_string(cmp.kind);
    doc["period"] = period;
    doc["construction"] = is_distribution_index(cmp.kind) ? "qq" : "scatter";
    doc["replicates"] = cmp.simulated.size();
    doc["levels"] = cmp.levels;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const ComparisonRow& row : cmp.rows) {
        nlohmann::ordered_json r;
        r["label"] = row.label;
        r["observed"] = json_num(row.observed);
        r["median"] = json_num(row.median);
        nlohmann::ordered_json q = nlohmann::ordered_json::array();
        for (double v : row.quantiles) q.push_back(json_num(v));
        r["quantiles"] = std::move(q);
        rows.push_back(std::move(r));
    }
    doc["rows"] = std::move(rows);
    nlohmann::ordered_json skipped = cmp.observed.skipped;
    doc["skipped"] = std::move(skipped);
    return doc;
}

void write_report_svg(std::ostream& out, const EnsembleComparison& cmp, const std::string& title) {
    constexpr double size = 420.0;
    constexpr double pad = 50.0;
    const double plot = size - 2 * pad;

    double lo = INFINITY, hi = -INFINITY;
    for (const ComparisonRow& r : cmp.rows) {
        if (std::isfinite(r.observed) && std::isfinite(r.median)) {
            lo = std::min({lo, r.observed, r.median});
            hi = std::max({hi, r.observed, r.median});
        }
    }
    if (!(lo <= hi)) {
        lo = 0.0;
        hi = 1.0;
    }
    if (hi - lo < 1e-12) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double margin = 0.05 * (hi - lo);
    lo -= margin;
    hi += margin;
    auto px = [&](double v) { return pad + (v - lo) / (hi - lo) * plot; };
    auto py = [&](double v) { return size - pad - (v - lo) / (hi - lo) * plot; };

    const bool qq = is_distribution_index(cmp.kind);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size
        << "\" viewBox=\"0 0 " << size << ' ' << size << "\">\n";
    out << "<rect x=\"0\" y=\"0\" width=\"" << size << "\" height=\"" << size << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << size / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"13\">"
        << xml_escape(title) << "</text>\n";
    out << "<rect x=\"" << pad << "\" y=\"" << pad << "\" width=\"" << plot << "\" height=\"" << plot
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << fixed(px(lo)) << "\" y1=\"" << fixed(py(lo)) << "\" x2=\"" << fixed(px(hi))
        << "\" y2=\"" << fixed(py(hi)) << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
    out << "<text x=\"" << size / 2 << "\" y=\"" << size - 12
        << "\" text-anchor=\"middle\" font-size=\"11\">observed</text>\n";
    out << "<text x=\"14\" y=\"" << size / 2 << "\" text-anchor=\"middle\" font-size=\"11\" "
        << "transform=\"rotate(-90 14 " << size / 2 << ")\">"
        << (qq ? "median simulated quantile" : "ensemble median") << "</text>\n";
    out << "<text x=\"" << pad << "\" y=\"" << size - pad + 14 << "\" font-size=\"10\">" << fixed(lo)
        << "</text>\n";
    out << "<text x=\"" << size - pad << "\" y=\"" << size - pad + 14
        << "\" text-anchor=\"end\" font-size=\"10\">" << fixed(hi) << "</text>\n";
    for (const ComparisonRow& r : cmp.rows) {
        if (!std::isfinite(r.observed) || !std::isfinite(r.median)) continue;
        out << "<circle cx=\"" << fixed(px(r.observed)) << "\" cy=\"" << fixed(py(r.median))
            << "\" r=\"2\" fill=\"steelblue\" fill-opacity=\"0.6\"/>\n";
    }
    out << "</svg>\n";
}

}  // namespace latocc
