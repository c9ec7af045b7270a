#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <istream>
#include <numeric>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "qwell/error.hpp"

namespace qwell {

struct Date {
    int year = 1970;
    int month = 1;
    int day = 1;

    friend auto operator<=>(const Date&, const Date&) = default;
};

inline bool is_leap_year(int y) {
    return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

inline int days_in_month(int year, int month) {
    static constexpr int table[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month == 2 && is_leap_year(year)) return 29;
    return table[month - 1];
}

inline Date next_calendar_day(Date d) {
    if (++d.day > days_in_month(d.year, d.month)) {
        d.day = 1;
        if (++d.month > 12) {
            d.month = 1;
            ++d.year;
        }
    }
    return d;
}

inline std::string to_string(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.year, d.month, d.day);
    return buf;
}

/// Strict ISO-8601 (YYYY-MM-DD). Anything else is rejected.
inline Date parse_date(std::string_view text) {
    auto digits = [](std::string_view s) {
        return std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
    };
    if (text.size() != 10 || text[4] != '-' || text[7] != '-' ||
        !digits(text.substr(0, 4)) || !digits(text.substr(5, 2)) || !digits(text.substr(8, 2))) {
        fail("parse_error", "invalid ISO-8601 date: '" + std::string(text) + "'");
    }
    Date d;
    std::from_chars(text.data(), text.data() + 4, d.year);
    std::from_chars(text.data() + 5, text.data() + 7, d.month);
    std::from_chars(text.data() + 8, text.data() + 10, d.day);
    if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > days_in_month(d.year, d.month)) {
        fail("parse_error", "invalid calendar date: '" + std::string(text) + "'");
    }
    return d;
}

/// One trading day. low <= open,close <= high; volume >= 0.
struct EodBar {
    Date date;
    double open = 0;
    double high = 0;
    double low = 0;
    double close = 0;
    std::int64_t volume = 0;
};

inline void check_bar_invariants(const EodBar& b, const std::string& where) {
    if (b.high < b.low) fail("parse_error", "high < low" + where);
    if (b.open < b.low || b.open > b.high) fail("parse_error", "open outside [low, high]" + where);
    if (b.close < b.low || b.close > b.high) fail("parse_error", "close outside [low, high]" + where);
    if (b.volume < 0) fail("parse_error", "negative volume" + where);
}

/// Ordered bar history plus the instrument's free float v_ff.
struct MarketSeries {
    std::vector<EodBar> bars;
    std::int64_t free_float = 0;
};

namespace detail {

inline double parse_double_field(std::string_view s, const std::string& where) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        fail("parse_error", "unparseable number '" + std::string(s) + "'" + where);
    }
    return v;
}

inline std::int64_t parse_volume_field(std::string_view s, const std::string& where) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        fail("parse_error", "unparseable volume '" + std::string(s) + "'" + where);
    }
    return v;
}

inline std::vector<std::string_view> split_csv_row(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

} // namespace detail

inline constexpr std::string_view kEodCsvHeader = "date,open,high,low,close,volume";

/// Parses `date,open,high,low,close,volume` rows. LF or CRLF endings.
/// Errors carry the 1-based line number of the offending row.
inline std::vector<EodBar> parse_eod_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) fail("parse_error", "empty input, expected CSV header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kEodCsvHeader) {
        fail("parse_error", "bad header, expected '" + std::string(kEodCsvHeader) + "'");
    }

    std::vector<EodBar> bars;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::string where = " at line " + std::to_string(line_no);

        auto fields = detail::split_csv_row(line);
        if (fields.size() != 6) {
            fail("parse_error", "expected 6 columns, got " + std::to_string(fields.size()) + where);
        }
        EodBar b;
        b.date = parse_date(fields[0]);
        b.open = detail::parse_double_field(fields[1], where);
        b.high = detail::parse_double_field(fields[2], where);
        b.low = detail::parse_double_field(fields[3], where);
        b.close = detail::parse_double_field(fields[4], where);
        b.volume = detail::parse_volume_field(fields[5], where);
        check_bar_invariants(b, where);
        bars.push_back(b);
    }
    return bars;
}

inline std::vector<EodBar> parse_eod_csv(const std::string& text) {
    std::istringstream in(text);
    return parse_eod_csv(in);
}

/// Sorts by date, rejects duplicates, pairs the bars with the free float.
inline MarketSeries validate_series(std::vector<EodBar> bars, std::int64_t free_float) {
    if (free_float <= 0) fail("bad_argument", "free_float must be positive");
    std::stable_sort(bars.begin(), bars.end(),
                     [](const EodBar& a, const EodBar& b) { return a.date < b.date; });
    for (std::size_t i = 1; i < bars.size(); ++i) {
        if (bars[i].date == bars[i - 1].date) {
            fail("bad_argument", "duplicate date " + to_string(bars[i].date));
        }
    }
    return MarketSeries{std::move(bars), free_float};
}

/// Arithmetic mean of volume over the last `window` bars (v_m).
inline double mean_daily_volume(const MarketSeries& series, std::size_t window) {
    if (window < 1 || window > series.bars.size()) {
        fail("bad_argument", "window must be in [1, " + std::to_string(series.bars.size()) + "]");
    }
    double sum = 0;
    for (std::size_t i = series.bars.size() - window; i < series.bars.size(); ++i) {
        sum += static_cast<double>(series.bars[i].volume);
    }
    return sum / static_cast<double>(window);
}

} // namespace qwell
