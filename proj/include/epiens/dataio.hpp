/**
 * @file dataio.hpp
 * @brief CSV ingestion, the bundled outbreak tables and outlier quality control.
 *
 * CSV layout: header `date,day,confirmed,cumulative`, one row per day. The
 * cumulative column is authoritative; `confirmed` is only cross-checked.
 */
#pragma once

#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "case_series.hpp"
#include "errors.hpp"

namespace epiens {

struct CsvParseResult {
    CaseSeries series;
    std::vector<std::string> warnings;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline bool parse_double(std::string_view s, double& out) {
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size() && std::isfinite(out);
}

/// Shortest text that parses back to the same double.
inline std::string format_number(double v) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    (void)ec;
    return std::string(buf.data(), ptr);
}

inline std::string iso_date(std::chrono::sys_days d) {
    std::chrono::year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

} // namespace detail

/// Parse CSV text into a series. @p label names the country.
inline CsvParseResult parse_csv(std::string_view text, std::string label = "input") {
    std::vector<std::string> warnings;
    std::vector<double> cumulative;
    std::vector<double> confirmed;
    std::vector<bool> has_confirmed;
    std::vector<std::string> dates;
    int first_day = 0;
    bool header_seen = false;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    if (text.substr(0, 3) == "\xEF\xBB\xBF") pos = 3;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        auto line = detail::trim(raw);
        if (line.empty()) continue;

        auto f = detail::split_fields(line);
        if (!header_seen) {
            if (f.size() != 4 || f[0] != "date" || f[1] != "day" || f[2] != "confirmed" || f[3] != "cumulative") {
                throw ParseError(line_no, "expected header 'date,day,confirmed,cumulative'");
            }
            header_seen = true;
            continue;
        }
        if (f.size() != 4) {
            throw ParseError(line_no, "expected 4 fields, found " + std::to_string(f.size()));
        }
        double day_value = 0.0;
        if (!detail::parse_double(f[1], day_value)) {
            throw ParseError(line_no, "day is not a number: '" + std::string(f[1]) + "'");
        }
        const int day = static_cast<int>(std::trunc(day_value));
        double cum = 0.0;
        if (!detail::parse_double(f[3], cum)) {
            throw ParseError(line_no, "cumulative is not a number: '" + std::string(f[3]) + "'");
        }
        if (cum < 0.0) {
            throw ValueError("line " + std::to_string(line_no) + ": negative cumulative count " +
                             std::string(f[3]));
        }
        double conf = 0.0;
        bool conf_ok = true;
        if (!f[2].empty() && !detail::parse_double(f[2], conf)) {
            throw ParseError(line_no, "confirmed is not a number: '" + std::string(f[2]) + "'");
        }
        if (f[2].empty()) conf_ok = false;

        if (cumulative.empty()) {
            first_day = day;
        } else if (day != first_day + static_cast<int>(cumulative.size())) {
            throw StructuralError("line " + std::to_string(line_no) + ": day " + std::to_string(day) +
                                  " does not follow day " +
                                  std::to_string(first_day + static_cast<int>(cumulative.size()) - 1));
        }
        cumulative.push_back(cum);
        confirmed.push_back(conf);
        has_confirmed.push_back(conf_ok);
        dates.emplace_back(f[0]);
    }
    if (!header_seen) {
        throw ParseError(line_no == 0 ? 1 : line_no, "missing header");
    }
    if (cumulative.empty()) {
        throw StructuralError("no data rows");
    }
    for (std::size_t i = 1; i < cumulative.size(); ++i) {
        const double inc = cumulative[i] - cumulative[i - 1];
        if (has_confirmed[i] && confirmed[i] != inc) {
            warnings.push_back("day " + std::to_string(first_day + static_cast<int>(i)) + ": confirmed " +
                               detail::format_number(confirmed[i]) + " differs from cumulative increment " +
                               detail::format_number(inc));
        }
    }
    return {CaseSeries(std::move(label), first_day, std::move(cumulative), std::move(dates)),
            std::move(warnings)};
}

/// Inverse of parse_csv. The first row's `confirmed` is its cumulative value.
inline std::string render_csv(const CaseSeries& s) {
    std::ostringstream os;
    os << "date,day,confirmed,cumulative\n";
    const auto& c = s.cumulative();
    for (std::size_t i = 0; i < c.size(); ++i) {
        const double conf = i == 0 ? c[i] : c[i] - c[i - 1];
        os << s.dates()[i] << ',' << s.first_day() + static_cast<int>(i) << ','
           << detail::format_number(conf) << ',' << detail::format_number(c[i]) << '\n';
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Bundled tables

inline constexpr std::array<std::string_view, 4> kDatasetNames{"china", "italy", "south_korea", "uk"};

namespace detail {

inline std::vector<std::string> date_run(std::chrono::sys_days start, std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(iso_date(start + std::chrono::days(static_cast<int>(i))));
    }
    return out;
}

} // namespace detail

/**
 * One of the four bundled outbreak tables, exactly as published.
 *
 * China keeps the raw day-22 report of 15,200 new cases; its cumulative column
 * is the running sum of the raw daily reports, so the published (corrected)
 * cumulative values appear only after qc_correct().
 */
inline CaseSeries bundled_dataset(std::string_view name) {
    using namespace std::chrono;
    if (name == "china") {
        static constexpr std::array<double, 46> daily{
            0,    261,  261,  462,  688,  776,  1800, 1500, 1700, 2000, 2100, 2600,
            2800, 3200, 3900, 3700, 3200, 3400, 2700, 3000, 2500, 2000, 15200, 4000,
            2600, 2000, 2100, 1900, 1800, 396,  892,  825,  649,  221,  517,  412,
            439,  329,  435,  574,  206,  129,  119,  143,  145,  103};
        std::vector<double> cum;
        double total = 0.0;
        for (double d : daily) cum.push_back(total += d);
        return CaseSeries("china", 0, std::move(cum), detail::date_run(sys_days{2020y / January / 22}, daily.size()));
    }
    if (name == "italy") {
        std::vector<double> cum{0,     7,     128,   229,   322,   400,   528,   888,   1128,
                                1694,  2024,  2502,  3089,  3858,  4636,  5883,  7375,  9172,
                                10149, 12462, 15113, 17660, 21157, 24747, 27980, 31506, 35713,
                                41035, 47021, 53378, 59138, 63927, 69176};
        auto n = cum.size();
        return CaseSeries("italy", 0, std::move(cum), detail::date_run(sys_days{2020y / February / 21}, n));
    }
    if (name == "south_korea") {
        std::vector<double> cum{0,    27,   80,   178,  405,  571,  802,  946,  1230, 1735, 2306, 3119,
                                3705, 4304, 5155, 5590, 6253, 6562, 7010, 7282, 7447, 7482, 7724, 7838,
                                7948, 8055, 8131, 8205, 8289, 8382, 8534, 8773, 8920, 9018};
        auto n = cum.size();
        return CaseSeries("south_korea", 0, std::move(cum),
                          detail::date_run(sys_days{2020y / February / 18}, n));
    }
    if (name == "uk") {
        std::vector<double> cum{0,   3,   7,    10,   23,   26,   38,   74,   103,  151,  196,  265,  308, 370,
                                447, 577, 785,  1127, 1378, 1530, 1937, 2613, 3256, 3970, 5005, 5670, 6637};
        auto n = cum.size();
        return CaseSeries("uk", 0, std::move(cum), detail::date_run(sys_days{2020y / February / 26}, n));
    }
    std::string valid;
    for (auto v : kDatasetNames) valid += (valid.empty() ? "" : ", ") + std::string(v);
    throw LookupError("unknown dataset '" + std::string(name) + "'; valid names: " + valid);
}

// ---------------------------------------------------------------------------
// Quality control

/// Default ratio between a day's increment and the mean of its neighbours above
/// which the increment is treated as a reporting outlier.
inline constexpr double kDefaultQcThreshold = 4.5;

struct QcCorrection {
    int day = 0;
    double original = 0.0;
    double replacement = 0.0;
    std::string reason;
};

struct QcReport {
    std::vector<QcCorrection> corrected_days;
    double threshold_used = kDefaultQcThreshold;
};

/**
 * Replace isolated spikes in the daily increments.
 *
 * An interior day d is corrected when inc[d] > threshold * m with
 * m = (inc[d-1] + inc[d+1]) / 2 > 0; the increment becomes round(m) and the
 * cumulative column is rebuilt from the corrected increments. All days are
 * judged against the original increments in a single pass.
 */
inline std::pair<CaseSeries, QcReport> qc_correct(const CaseSeries& series,
                                                  double ratio_threshold = kDefaultQcThreshold) {
    if (series.size() < 3) {
        throw SizeError("qc_correct needs at least 3 days, got " + std::to_string(series.size()));
    }
    QcReport report;
    report.threshold_used = ratio_threshold;

    auto inc = series.increments();  // inc[i] belongs to day first_day + 1 + i
    auto fixed = inc;
    for (std::size_t i = 1; i + 1 < inc.size(); ++i) {
        const double mean = 0.5 * (inc[i - 1] + inc[i + 1]);
        if (mean > 0.0 && inc[i] > ratio_threshold * mean) {
            fixed[i] = std::round(mean);
            char ratio[32];
            std::snprintf(ratio, sizeof ratio, "%.2f", inc[i] / mean);
            report.corrected_days.push_back(
                {series.first_day() + 1 + static_cast<int>(i), inc[i], fixed[i],
                 std::string("increment is ") + ratio + "x the mean of its neighbours"});
        }
    }
    if (report.corrected_days.empty()) {
        return {series, report};
    }
    std::vector<double> cum{series.cumulative().front()};
    for (double d : fixed) cum.push_back(cum.back() + d);
    return {series.with_values(std::move(cum)), report};
}

} // namespace epiens
