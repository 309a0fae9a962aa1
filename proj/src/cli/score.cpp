#include "epiassim/cli/score.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <regex>
#include <sstream>

#include "epiassim/cli/series_io.hpp"
#include "epiassim/errors.hpp"

namespace epiassim {

namespace {

constexpr const char* kForecastHeader = "date,observable,q05,q25,q50,q75,q95";

std::optional<double> parse_double(const std::string& s)
{
    double v{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
        return std::nullopt;
    }
    return v;
}

struct Accumulator {
    int n = 0;
    int in50 = 0;
    int in90 = 0;
    double abs_err = 0.0;
    double width50 = 0.0;
    double width90 = 0.0;

    void add(const ForecastRow& r, double y)
    {
        ++n;
        in50 += (y >= r.q[1] && y <= r.q[3]) ? 1 : 0;
        in90 += (y >= r.q[0] && y <= r.q[4]) ? 1 : 0;
        abs_err += std::abs(y - r.q[2]);
        width50 += r.q[3] - r.q[1];
        width90 += r.q[4] - r.q[0];
    }

    ScoreMetrics metrics() const
    {
        ScoreMetrics m;
        m.n = n;
        if (n > 0) {
            const double dn = n;
            m.coverage50 = in50 / dn;
            m.coverage90 = in90 / dn;
            m.mae_q50 = abs_err / dn;
            m.mean_width50 = width50 / dn;
            m.mean_width90 = width90 / dn;
        }
        return m;
    }
};

std::optional<double> observed_value(const ForecastRow& r, const EpidemicSeries& s)
{
    const auto offset = (r.date - s.start_date).count();
    if (offset < 0 || offset >= static_cast<long>(s.size())) {
        return std::nullopt;
    }
    const auto i = static_cast<std::size_t>(offset);
    return static_cast<double>(r.observable == Observable::Cases ? s.cases[i] : s.deaths[i]);
}

nlohmann::ordered_json metrics_json(const ScoreMetrics& m)
{
    return {{"n", m.n},
            {"coverage50", m.coverage50},
            {"coverage90", m.coverage90},
            {"mae_q50", m.mae_q50},
            {"mean_width50", m.mean_width50},
            {"mean_width90", m.mean_width90}};
}

} // namespace

const char* observable_name(Observable o)
{
    return o == Observable::Cases ? "cases" : "deaths";
}

std::vector<ForecastRow> forecast_rows(const ForecastResult& fc, Date series_start)
{
    std::vector<ForecastRow> rows;
    for (int d = 0; d < fc.horizon(); ++d) {
        const Date date = series_start + std::chrono::days{fc.forecast_day + d};
        for (Observable o : {Observable::Cases, Observable::Deaths}) {
            const QuantileTable& t = o == Observable::Cases ? fc.cases : fc.deaths;
            ForecastRow r{date, o, {}};
            for (std::size_t q = 0; q < 5; ++q) {
                r.q[q] = t(d, static_cast<Eigen::Index>(q));
            }
            if (r.q[0] < 0.0 || !std::is_sorted(r.q.begin(), r.q.end())) {
                throw std::logic_error("forecast quantiles are not monotone on " + format_date(date));
            }
            rows.push_back(r);
        }
    }
    return rows;
}

void write_forecast_csv(std::ostream& out, const std::vector<ForecastRow>& rows)
{
    out << kForecastHeader << '\n';
    for (const auto& r : rows) {
        out << format_date(r.date) << ',' << observable_name(r.observable);
        for (double v : r.q) {
            out << ',' << format_number(v);
        }
        out << '\n';
    }
}

std::vector<ForecastRow> read_forecast_csv(std::istream& in)
{
    std::string line;
    std::size_t line_no = 0;
    std::vector<ForecastRow> rows;
    bool header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        if (!header) {
            if (line != kForecastHeader) {
                throw ParseError(line_no, std::string("expected header '") + kForecastHeader + "'");
            }
            header = true;
            continue;
        }
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) {
            fields.push_back(f);
        }
        if (fields.size() != 7) {
            throw ParseError(line_no, "expected 7 fields, got " + std::to_string(fields.size()));
        }
        ForecastRow r;
        const auto date = parse_date(fields[0]);
        if (!date) {
            throw ParseError(line_no, "bad date '" + fields[0] + "'");
        }
        r.date = *date;
        if (fields[1] == "cases") {
            r.observable = Observable::Cases;
        }
        else if (fields[1] == "deaths") {
            r.observable = Observable::Deaths;
        }
        else {
            throw ParseError(line_no, "unknown observable '" + fields[1] + "'");
        }
        for (std::size_t q = 0; q < 5; ++q) {
            const auto v = parse_double(fields[q + 2]);
            if (!v) {
                throw ParseError(line_no, "bad quantile '" + fields[q + 2] + "'");
            }
            r.q[q] = *v;
        }
        rows.push_back(r);
    }
    if (!header) {
        throw ParseError(line_no, "empty forecast file");
    }
    return rows;
}

std::vector<ForecastRow> load_forecast_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open forecast file " + path.string());
    }
    return read_forecast_csv(in);
}

ScoreMetrics score_rows(const std::vector<ForecastRow>& rows, const EpidemicSeries& observed)
{
    Accumulator acc;
    for (const auto& r : rows) {
        if (const auto y = observed_value(r, observed)) {
            acc.add(r, *y);
        }
    }
    if (acc.n == 0) {
        throw ScoringError("forecast dates do not overlap the observed series");
    }
    return acc.metrics();
}

ScoreReport score_forecasts(const std::vector<std::pair<std::string, std::vector<ForecastRow>>>& forecasts,
                            const EpidemicSeries& observed)
{
    ScoreReport report;
    Accumulator total;
    for (const auto& [name, rows] : forecasts) {
        Accumulator all;
        Accumulator cases;
        Accumulator deaths;
        for (const auto& r : rows) {
            if (const auto y = observed_value(r, observed)) {
                all.add(r, *y);
                total.add(r, *y);
                (r.observable == Observable::Cases ? cases : deaths).add(r, *y);
            }
        }
        if (all.n > 0) {
            report.windows.push_back({name, all.metrics(), cases.metrics(), deaths.metrics()});
        }
    }
    if (total.n == 0) {
        throw ScoringError("no forecast date overlaps the observed series");
    }
    report.aggregate = total.metrics();
    return report;
}

std::vector<std::filesystem::path> find_forecast_files(const std::filesystem::path& dir)
{
    if (!std::filesystem::is_directory(dir)) {
        throw ConfigError("not a directory: " + dir.string());
    }
    static const std::regex pattern(R"(forecast_(\d+)\.csv)");
    std::map<long, std::filesystem::path> found;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        std::smatch m;
        const std::string name = entry.path().filename().string();
        if (entry.is_regular_file() && std::regex_match(name, m, pattern)) {
            found.emplace(std::stol(m[1].str()), entry.path());
        }
    }
    std::vector<std::filesystem::path> out;
    for (auto& [k, p] : found) {
        out.push_back(p);
    }
    return out;
}

nlohmann::ordered_json report_to_json(const ScoreReport& report)
{
    nlohmann::ordered_json j;
    j["windows"] = nlohmann::ordered_json::array();
    for (const auto& w : report.windows) {
        j["windows"].push_back({{"forecast", w.name},
                                {"all", metrics_json(w.all)},
                                {"cases", metrics_json(w.cases)},
                                {"deaths", metrics_json(w.deaths)}});
    }
    j["aggregate"] = metrics_json(report.aggregate);
    return j;
}

} // namespace epiassim
