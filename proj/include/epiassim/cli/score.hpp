#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "epiassim/assimilation.hpp"
#include "epiassim/observation.hpp"

namespace epiassim {

enum class Observable { Cases, Deaths };

const char* observable_name(Observable o);

/// One line of a forecast CSV: q05, q25, q50, q75, q95 for one day.
struct ForecastRow {
    Date date{};
    Observable observable = Observable::Cases;
    std::array<double, 5> q{};
};

/// Rows for each forecast day, cases before deaths. Throws std::logic_error
/// if a row is not monotone or has a negative quantile.
std::vector<ForecastRow> forecast_rows(const ForecastResult& fc, Date series_start);

void write_forecast_csv(std::ostream& out, const std::vector<ForecastRow>& rows);
std::vector<ForecastRow> read_forecast_csv(std::istream& in);
std::vector<ForecastRow> load_forecast_csv(const std::filesystem::path& path);

struct ScoreMetrics {
    int n = 0;
    double coverage50 = 0.0;
    double coverage90 = 0.0;
    double mae_q50 = 0.0;
    double mean_width50 = 0.0;
    double mean_width90 = 0.0;
};

/// Scores the rows whose date falls inside `observed`; others are skipped.
/// Throws ScoringError when no row overlaps.
ScoreMetrics score_rows(const std::vector<ForecastRow>& rows, const EpidemicSeries& observed);

struct WindowScore {
    std::string name;
    ScoreMetrics all;
    ScoreMetrics cases;
    ScoreMetrics deaths;
};

struct ScoreReport {
    std::vector<WindowScore> windows;
    ScoreMetrics aggregate;
};

/// Scores each named forecast file; windows without overlap are skipped,
/// but at least one must overlap.
ScoreReport score_forecasts(const std::vector<std::pair<std::string, std::vector<ForecastRow>>>& forecasts,
                            const EpidemicSeries& observed);

/// forecast_<k>.csv files of a run directory in window order.
std::vector<std::filesystem::path> find_forecast_files(const std::filesystem::path& dir);

nlohmann::ordered_json report_to_json(const ScoreReport& report);

} // namespace epiassim
