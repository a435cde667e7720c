#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "rfsa/errors.hpp"
#include "rfsa/time_series.hpp"

namespace rfsa::io {

/// Shortest decimal string that parses back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

/// Timestamps are written with exactly 10 decimals.
inline std::string format_time(double t) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, t, std::chars_format::fixed, 10);
    return std::string(buf, res.ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s) noexcept {
    constexpr std::string_view ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const auto comma = line.find(',', pos);
        out.push_back(trim(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos)));
        if (comma == std::string_view::npos) {
            return out;
        }
        pos = comma + 1;
    }
}

inline double parse_number(std::string_view field, const char* column, std::size_t line_no) {
    if (!field.empty() && field.front() == '+') {
        field.remove_prefix(1);
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
        throw ParseError(std::string("column '") + column + "': cannot parse '" + std::string(field) + "' as a number",
                         line_no);
    }
    return v;
}

} // namespace detail

/// Reads a two-column CSV with header "t,w".
///
/// Blank lines are ignored. Malformed rows raise ParseError with the 1-based
/// line number; out-of-order timestamps raise InvalidArgument naming the line.
inline TimeSeries read_series_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    std::vector<double> t;
    std::vector<double> w;
    std::vector<std::size_t> lines;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = detail::trim(line);
        if (body.empty()) {
            continue;
        }
        const auto fields = detail::split_fields(body);
        if (!have_header) {
            if (fields.size() != 2 || fields[0] != "t" || fields[1] != "w") {
                throw ParseError("expected header 't,w', found '" + std::string(body) + "'", line_no);
            }
            have_header = true;
            continue;
        }
        if (fields.size() != 2) {
            throw ParseError("expected 2 fields, found " + std::to_string(fields.size()), line_no);
        }
        const double tk = detail::parse_number(fields[0], "t", line_no);
        const double wk = detail::parse_number(fields[1], "w", line_no);
        if (!std::isfinite(tk) || !std::isfinite(wk)) {
            throw ParseError("non-finite value", line_no);
        }
        if (!t.empty() && !(tk > t.back())) {
            throw InvalidArgument("line " + std::to_string(line_no) + ": timestamp " + std::string(fields[0]) +
                                  " does not exceed the previous one (line " + std::to_string(lines.back()) + ")");
        }
        t.push_back(tk);
        w.push_back(wk);
        lines.push_back(line_no);
    }
    if (!have_header) {
        throw ParseError("empty input, expected header 't,w'", 0);
    }
    if (t.size() < 2) {
        throw InvalidArgument("time series needs at least 2 rows, found " + std::to_string(t.size()));
    }
    return TimeSeries(TimeGrid(std::move(t)), std::move(w));
}

inline void write_series_csv(std::ostream& out, const TimeSeries& series) {
    out << "t,w\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
        out << format_time(series.grid()[k]) << ',' << format_double(series.values()[k]) << '\n';
    }
}

/// Columns t, w, reconstructed, residual.
inline void write_reconstruction_csv(std::ostream& out, const TimeSeries& series, std::span<const double> fitted) {
    if (fitted.size() != series.size()) {
        throw InvalidArgument("reconstruction length differs from the series");
    }
    out << "t,w,reconstructed,residual\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
        const double w = series.values()[k];
        out << format_time(series.grid()[k]) << ',' << format_double(w) << ',' << format_double(fitted[k]) << ','
            << format_double(w - fitted[k]) << '\n';
    }
}

} // namespace rfsa::io
