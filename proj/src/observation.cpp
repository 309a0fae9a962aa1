#include "epiassim/observation.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace epiassim {

std::string format_date(Date d)
{
    const std::chrono::year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

EpidemicSeries EpidemicSeries::slice(std::size_t begin, std::size_t length) const
{
    if (begin + length > size()) {
        throw std::out_of_range("EpidemicSeries::slice: range exceeds series length");
    }
    EpidemicSeries out;
    out.start_date = date_at(begin);
    out.cases.assign(cases.begin() + static_cast<std::ptrdiff_t>(begin),
                     cases.begin() + static_cast<std::ptrdiff_t>(begin + length));
    out.deaths.assign(deaths.begin() + static_cast<std::ptrdiff_t>(begin),
                      deaths.begin() + static_cast<std::ptrdiff_t>(begin + length));
    return out;
}

void EpidemicSeries::validate() const
{
    if (cases.size() != deaths.size()) {
        throw std::invalid_argument("EpidemicSeries: cases and deaths differ in length");
    }
    for (std::size_t i = 0; i < size(); ++i) {
        if (cases[i] < 0 || deaths[i] < 0) {
            throw std::invalid_argument("EpidemicSeries: negative count on " + format_date(date_at(i)));
        }
    }
}

void ObsConfig::validate() const
{
    if (!(p_report > 0.0 && p_report <= 1.0)) {
        throw std::invalid_argument("ObsConfig: p_report must lie in (0, 1]");
    }
    if (!(theta_over > 0.0) || !std::isfinite(theta_over)) {
        throw std::invalid_argument("ObsConfig: theta_over must be positive");
    }
    if (!(omega_over >= 1.0) || !std::isfinite(omega_over)) {
        throw std::invalid_argument("ObsConfig: omega_over must be at least 1");
    }
}

Eigen::VectorXd expected_deaths(const Trajectory<double>& traj)
{
    const auto d_row = traj.states.row(idx(Compartment::D));
    const Eigen::Index n = traj.num_days();
    return (d_row.segment(1, n) - d_row.segment(0, n)).transpose();
}

Eigen::VectorXd expected_cases(const Trajectory<double>& traj, const EpiParams<double>& p)
{
    const double inflow_rate = p.f * p.exposed_stage_rate();
    Eigen::VectorXd mu(traj.num_days());
    for (Eigen::Index d = 0; d < mu.size(); ++d) {
        mu(d) = inflow_rate * trapezoid_day_integral(traj.e2_nodes.col(d));
    }
    return mu;
}

namespace {

// Tail of Stirling's series for log Gamma.
double stirling_correction(double x)
{
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    return inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0));
}

// Beyond this size the lgamma difference loses digits to cancellation.
constexpr double kLargeShape = 1e5;

double poisson_logpmf(std::int64_t y, double m)
{
    const double yd = static_cast<double>(y);
    return yd * std::log(m) - m - std::lgamma(yd + 1.0);
}

} // namespace

double nb_logpmf(std::int64_t y, double mean, const ObsConfig& cfg)
{
    if (y < 0) {
        return -std::numeric_limits<double>::infinity();
    }
    const double m = std::max(cfg.p_report * mean, kMeanFloor);
    // Var / mean - 1; the NB "success" probability is 1 / (1 + excess).
    const double excess = (cfg.omega_over - 1.0) + cfg.theta_over * m;
    if (excess <= 0.0) {
        return poisson_logpmf(y, m);
    }
    const double yd = static_cast<double>(y);
    const double r = m / excess;
    const double log1p_excess = std::log1p(excess);

    if (r > kLargeShape) {
        // lgamma(r + y) - lgamma(r) via Stirling, with y log r folded into the
        // y log(1 - p) term so the Poisson limit stays exact.
        const double lg_ratio_rest = (r + yd - 0.5) * std::log1p(yd / r) - yd +
                                     stirling_correction(r + yd) - stirling_correction(r);
        const double r_log_p = -m * (log1p_excess / excess);
        return lg_ratio_rest + yd * (std::log(m) - log1p_excess) - std::lgamma(yd + 1.0) + r_log_p;
    }
    const double log_p = -log1p_excess;
    const double log_q = std::log(excess) - log1p_excess;
    return std::lgamma(r + yd) - std::lgamma(r) - std::lgamma(yd + 1.0) + r * log_p + yd * log_q;
}

std::int64_t nb_sample(double mean, const ObsConfig& cfg, std::mt19937_64& rng)
{
    const double m = std::max(cfg.p_report * mean, kMeanFloor);
    const double excess = (cfg.omega_over - 1.0) + cfg.theta_over * m;
    double rate = m;
    if (excess > 0.0 && m / excess < 1e12) {
        std::gamma_distribution<double> mix(m / excess, excess);
        rate = mix(rng);
    }
    if (!(rate > 0.0)) {
        return 0;
    }
    std::poisson_distribution<std::int64_t> pois(rate);
    return pois(rng);
}

namespace {

// Neumaier compensated summation.
struct CompensatedSum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double v)
    {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v)) {
            comp += (sum - t) + v;
        }
        else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    double value() const { return sum + comp; }
};

} // namespace

double log_likelihood(const EpidemicSeries& series, const Eigen::VectorXd& mu_cases,
                      const Eigen::VectorXd& mu_deaths, const ObsConfig& cfg)
{
    const auto n = static_cast<Eigen::Index>(series.size());
    if (n > mu_cases.size() || n > mu_deaths.size()) {
        throw std::invalid_argument("log_likelihood: series longer than the trajectory");
    }
    CompensatedSum acc;
    for (Eigen::Index i = 0; i < n; ++i) {
        acc.add(nb_logpmf(series.cases[static_cast<std::size_t>(i)], mu_cases(i), cfg));
        acc.add(nb_logpmf(series.deaths[static_cast<std::size_t>(i)], mu_deaths(i), cfg));
    }
    return acc.value();
}

double log_likelihood(const EpidemicSeries& series, const Trajectory<double>& traj,
                      const EpiParams<double>& p, const ObsConfig& cfg)
{
    return log_likelihood(series, expected_cases(traj, p), expected_deaths(traj), cfg);
}

} // namespace epiassim
