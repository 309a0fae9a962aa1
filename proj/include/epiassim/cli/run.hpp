#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "epiassim/assimilation.hpp"

namespace epiassim {

struct RunConfig {
    std::filesystem::path data;
    std::string locality = "unnamed";
    WindowConfig window{};
    AssimilationOptions assimilation{};
    std::filesystem::path out_dir;

    /// Throws ConfigError for unreadable paths or out-of-range settings.
    void validate() const;
};

nlohmann::ordered_json config_to_json(const RunConfig& cfg);

/// Summary of a completed (possibly partial) run.
nlohmann::ordered_json summary_json(const RunConfig& cfg, const EpidemicSeries& series,
                                    const SequentialResult& result);

/// Machine-readable error record.
nlohmann::ordered_json error_json(const std::string& kind, const std::string& message,
                                  std::optional<int> window = std::nullopt);

/// Writes forecast_k.csv, posterior_k.csv, forecast_k_cases.svg and
/// forecast_k_deaths.svg for one window.
void write_window_artifacts(const RunConfig& cfg, const EpidemicSeries& series, const WindowResult& w);

/// Loads the data, runs the sequential pipeline and writes all artifacts
/// plus summary.json. Returns the process exit status: 0 iff every window
/// completed. Errors are reported as JSON on `err`.
int run_pipeline(const RunConfig& cfg, std::ostream& log, std::ostream& err);

} // namespace epiassim
