#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "epiassim/epimodel.hpp"
#include "epiassim/observation.hpp"
#include "epiassim/odeint.hpp"
#include "epiassim/priors.hpp"
#include "epiassim/sampler.hpp"

namespace epiassim {

/// Sliding-window geometry in days. Window k starts at t0 + advance * k,
/// learns from `learning` days, skips `delay` immature days and forecasts
/// `horizon` days.
struct WindowConfig {
    int t0 = 0;
    int learning = 28;
    int delay = 7;
    int horizon = 14;
    int advance = 7;
    std::optional<int> max_windows;

    void validate() const;
};

/// Half-open day range [begin, end).
struct Interval {
    int begin = 0;
    int end = 0;

    int length() const { return end - begin; }
    bool operator==(const Interval&) const = default;
};

struct WindowBounds {
    int start = 0;
    Interval learning;
    Interval delay;
    Interval forecast;
};

WindowBounds window_bounds(const WindowConfig& cfg, int k);

/// Number of windows whose learning period fits inside `series_length` days.
int count_windows(const WindowConfig& cfg, std::size_t series_length);

struct AssimilationOptions {
    /// Fixed model constants; beta, omega and g here are ignored.
    EpiParams<double> fixed{};
    ObsConfig obs{};
    SamplerConfig sampler{};
    /// Spread multiplier for the autoregressive beta/omega/g prior.
    double inflation = 1.5;
    double step = kDefaultStep;
    std::uint64_t seed = 1;
    PriorSpec initial_prior = default_prior();
    int max_init_tries = 1000;
    /// Largest fraction of draws that may fail during forecasting.
    double max_dropped_fraction = 0.01;
    /// Draw negative-binomial noise for the predictive bands (else bands of
    /// the expected counts).
    bool predictive_noise = true;

    void validate() const;
};

inline constexpr std::array<double, 5> kBandLevels{0.05, 0.25, 0.50, 0.75, 0.95};

/// Columns q05, q25, q50, q75, q95; one row per day.
using QuantileTable = Eigen::Matrix<double, Eigen::Dynamic, 5>;

struct ParamSummary {
    double median = 0.0;
    double q05 = 0.0;
    double q95 = 0.0;
};

struct ForecastResult {
    int window = 0;
    int window_start = 0;
    /// First forecast day, relative to the start of the series.
    int forecast_day = 0;
    QuantileTable cases;
    QuantileTable deaths;
    /// beta, omega, g in that order.
    std::array<ParamSummary, 3> theta{};
    int dropped_draws = 0;

    int horizon() const { return static_cast<int>(cases.rows()); }
};

ParamSummary summarize(const Eigen::Ref<const Eigen::VectorXd>& draws);

/// Row-wise quantiles of a (days x draws) matrix.
QuantileTable band_quantiles(const Eigen::MatrixXd& per_day_draws);

/// Log posterior of one window: prior plus likelihood of `learning_data`,
/// whose first day is the window's initial time.
LogDensity make_log_posterior(const EpidemicSeries& learning_data, const PriorSpec& prior,
                              const AssimilationOptions& opts);

/// MCMC over the learning period; start points are prior draws.
PosteriorSamples assimilate_window(const EpidemicSeries& learning_data, const PriorSpec& prior,
                                   const AssimilationOptions& opts, Rng& rng);

struct StatePrior {
    /// Gamma priors for E0, O0, U0, R0, D0.
    std::vector<Distribution1D> dists;
    /// Draws discarded because their propagated state was infeasible.
    int dropped = 0;
    /// Aggregate (E, O, U, R, D) of each kept draw at the new start time.
    Eigen::MatrixXd propagated;
};

StatePrior propagate_state_prior(const PosteriorSamples& post, int advance, const AssimilationOptions& opts);

/// Beta (LogNormal), omega (Beta), g (Beta) priors: moment-matched to the
/// marginal posterior with its variance multiplied by kappa^2.
std::vector<Distribution1D> autoregressive_theta_prior(const PosteriorSamples& post, double kappa);

PriorSpec assemble_prior(const std::vector<Distribution1D>& state, const std::vector<Distribution1D>& theta);

ForecastResult forecast(const PosteriorSamples& post, const WindowConfig& cfg, int k,
                        const AssimilationOptions& opts, Rng& rng);

struct WindowResult {
    ForecastResult forecast;
    PosteriorSamples posterior;
    int propagation_dropped = 0;
};

struct WindowFailure {
    int window = 0;
    std::string kind;
    std::string message;
};

struct SequentialResult {
    std::vector<WindowResult> windows;
    std::optional<WindowFailure> failure;

    bool ok() const { return !failure.has_value(); }
};

/// Window k uses its own generator seeded from (opts.seed, k).
Rng window_rng(std::uint64_t seed, int k);

SequentialResult run_sequential(const EpidemicSeries& series, const WindowConfig& cfg,
                                const AssimilationOptions& opts);

} // namespace epiassim
