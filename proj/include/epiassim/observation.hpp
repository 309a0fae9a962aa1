#pragma once

#include <Eigen/Core>

#include <chrono>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "epiassim/epimodel.hpp"
#include "epiassim/odeint.hpp"

namespace epiassim {

using Date = std::chrono::sys_days;

std::string format_date(Date d);

/// Daily incident confirmed cases and deaths starting at `start_date`.
/// Entry i is the count reported for the day [i, i + 1) relative to the start.
struct EpidemicSeries {
    Date start_date{};
    std::vector<std::int64_t> cases;
    std::vector<std::int64_t> deaths;

    std::size_t size() const { return cases.size(); }
    Date date_at(std::size_t i) const { return start_date + std::chrono::days{static_cast<int>(i)}; }

    /// Days [begin, begin + length) as a new series.
    EpidemicSeries slice(std::size_t begin, std::size_t length) const;

    /// Throws std::invalid_argument if lengths differ or a count is negative.
    void validate() const;

    bool operator==(const EpidemicSeries&) const = default;
};

/// Observation noise. Counts follow a negative binomial with mean
/// p_report * mu and variance omega_over * m + theta_over * m^2.
struct ObsConfig {
    double p_report = 1.0;
    double theta_over = 0.01;
    double omega_over = 2.0;

    void validate() const;
};

inline constexpr double kMeanFloor = 1e-8;

Eigen::VectorXd expected_deaths(const Trajectory<double>& traj);
Eigen::VectorXd expected_cases(const Trajectory<double>& traj, const EpiParams<double>& p);

double nb_logpmf(std::int64_t y, double mean, const ObsConfig& cfg);

/// One negative-binomial draw via its gamma-Poisson mixture.
std::int64_t nb_sample(double mean, const ObsConfig& cfg, std::mt19937_64& rng);

/// Sum of case and death log-pmfs over the days of `series`, which must start
/// at the trajectory's first day.
double log_likelihood(const EpidemicSeries& series, const Trajectory<double>& traj,
                      const EpiParams<double>& p, const ObsConfig& cfg);

/// Same as above with precomputed expected counts.
double log_likelihood(const EpidemicSeries& series, const Eigen::VectorXd& mu_cases,
                      const Eigen::VectorXd& mu_deaths, const ObsConfig& cfg);

} // namespace epiassim
