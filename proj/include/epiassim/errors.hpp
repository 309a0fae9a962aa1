#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace epiassim {

/// Base class of every error raised by the library. `kind()` is a stable
/// machine-readable tag used by the CLI when reporting failures as JSON.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

class InfeasibleParameters : public Error {
public:
    explicit InfeasibleParameters(const std::string& what) : Error("infeasible-parameters", what) {}
};

class IntegrationDiverged : public Error {
public:
    IntegrationDiverged(double time, const std::string& what)
        : Error("integration-diverged", what), time_(time) {}

    /// Day at which the solution stopped being finite or went negative.
    double time() const noexcept { return time_; }

private:
    double time_;
};

class FitDegenerate : public Error {
public:
    explicit FitDegenerate(const std::string& what) : Error("fit-degenerate", what) {}
};

class InitializationFailed : public Error {
public:
    explicit InitializationFailed(const std::string& what) : Error("initialization-failed", what) {}
};

class ForecastUnstable : public Error {
public:
    explicit ForecastUnstable(const std::string& what) : Error("forecast-unstable", what) {}
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("parse-error", "line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class DateGapError : public Error {
public:
    DateGapError(std::vector<std::string> missing, const std::string& what)
        : Error("date-gap", what), missing_(std::move(missing)) {}

    const std::vector<std::string>& missing_dates() const noexcept { return missing_; }

private:
    std::vector<std::string> missing_;
};

class ScoringError : public Error {
public:
    explicit ScoringError(const std::string& what) : Error("scoring-error", what) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error("config-error", what) {}
};

} // namespace epiassim
