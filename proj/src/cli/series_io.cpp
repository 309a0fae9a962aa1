#include "epiassim/cli/series_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <vector>

#include "epiassim/errors.hpp"

namespace epiassim {

namespace {

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_commas(std::string_view line)
{
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

template <typename Int>
std::optional<Int> parse_int(std::string_view s)
{
    Int v{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
        return std::nullopt;
    }
    return v;
}

std::int64_t parse_count(std::string_view field, const char* name, std::size_t line)
{
    const auto v = parse_int<std::int64_t>(field);
    if (!v) {
        throw ParseError(line, std::string(name) + " '" + std::string(field) + "' is not an integer");
    }
    if (*v < 0) {
        throw ParseError(line, std::string(name) + " must be non-negative, got " + std::string(field));
    }
    return *v;
}

} // namespace

std::optional<Date> parse_date(std::string_view text)
{
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        return std::nullopt;
    }
    const auto y = parse_int<int>(text.substr(0, 4));
    const auto m = parse_int<unsigned>(text.substr(5, 2));
    const auto d = parse_int<unsigned>(text.substr(8, 2));
    if (!y || !m || !d) {
        return std::nullopt;
    }
    const std::chrono::year_month_day ymd{std::chrono::year{*y}, std::chrono::month{*m}, std::chrono::day{*d}};
    if (!ymd.ok()) {
        return std::nullopt;
    }
    return Date{ymd};
}

EpidemicSeries read_series(std::istream& in)
{
    std::string raw;
    std::size_t line_no = 0;
    bool header_seen = false;
    EpidemicSeries series;
    std::optional<Date> previous;
    std::vector<std::string> missing;

    while (std::getline(in, raw)) {
        ++line_no;
        const std::string_view line = trim(raw);
        if (line.empty()) {
            continue;
        }
        const auto fields = split_commas(line);
        if (!header_seen) {
            if (fields.size() != 3 || fields[0] != "date" || fields[1] != "cases" || fields[2] != "deaths") {
                throw ParseError(line_no, "expected header 'date,cases,deaths'");
            }
            header_seen = true;
            continue;
        }
        if (fields.size() != 3) {
            throw ParseError(line_no, "expected 3 fields, got " + std::to_string(fields.size()));
        }
        const auto date = parse_date(fields[0]);
        if (!date) {
            throw ParseError(line_no, "bad date '" + std::string(fields[0]) + "'");
        }
        const std::int64_t cases = parse_count(fields[1], "cases", line_no);
        const std::int64_t deaths = parse_count(fields[2], "deaths", line_no);

        if (previous) {
            if (*date <= *previous) {
                throw ParseError(line_no, "date " + format_date(*date) + " is not after " + format_date(*previous));
            }
            for (Date d = *previous + std::chrono::days{1}; d < *date; d += std::chrono::days{1}) {
                missing.push_back(format_date(d));
            }
        }
        else {
            series.start_date = *date;
        }
        previous = date;
        series.cases.push_back(cases);
        series.deaths.push_back(deaths);
    }
    if (!header_seen) {
        throw ParseError(line_no, "missing header 'date,cases,deaths'");
    }
    if (!missing.empty()) {
        std::string list;
        for (const auto& m : missing) {
            list += (list.empty() ? "" : ", ") + m;
        }
        throw DateGapError(missing, "missing dates: " + list);
    }
    return series;
}

EpidemicSeries load_series(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open series file " + path.string());
    }
    return read_series(in);
}

void write_series(std::ostream& out, const EpidemicSeries& series)
{
    series.validate();
    out << "date,cases,deaths\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        out << format_date(series.date_at(i)) << ',' << series.cases[i] << ',' << series.deaths[i] << '\n';
    }
}

void save_series(const std::filesystem::path& path, const EpidemicSeries& series)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ConfigError("cannot write " + path.string());
    }
    write_series(out, series);
}

std::string format_number(double value)
{
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc{}) {
        throw std::runtime_error("format_number: conversion failed");
    }
    return {buf, ptr};
}

} // namespace epiassim
