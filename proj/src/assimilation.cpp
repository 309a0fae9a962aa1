#include "epiassim/assimilation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "epiassim/errors.hpp"
#include "epiassim/stats.hpp"

namespace epiassim {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Solution of one window for one parameter draw, or nullopt if the draw is
// infeasible or the integration blows up.
std::optional<Trajectory<double>> solve_draw(const InferenceVector& v, const AssimilationOptions& opts, int days)
{
    const EpiParams<double> p = with_inferred(opts.fixed, v);
    const auto x0 = try_assemble_initial_state(initial_conditions(v), p);
    if (!x0) {
        return std::nullopt;
    }
    try {
        return integrate(*x0, p, 0, days, opts.step);
    }
    catch (const IntegrationDiverged&) {
        return std::nullopt;
    }
}

std::vector<double> column(const Eigen::MatrixXd& m, Eigen::Index j)
{
    const Eigen::VectorXd c = m.col(j);
    return {c.data(), c.data() + c.size()};
}

} // namespace

void WindowConfig::validate() const
{
    if (learning < 1 || delay < 1 || horizon < 1 || advance < 1) {
        throw std::invalid_argument("WindowConfig: learning, delay, horizon and advance must all be >= 1");
    }
    if (advance > learning) {
        throw std::invalid_argument("WindowConfig: advance must not exceed the learning period");
    }
    if (t0 < 0) {
        throw std::invalid_argument("WindowConfig: t0 must be non-negative");
    }
    if (max_windows && *max_windows < 1) {
        throw std::invalid_argument("WindowConfig: max_windows must be >= 1");
    }
}

WindowBounds window_bounds(const WindowConfig& cfg, int k)
{
    if (k < 0) {
        throw std::invalid_argument("window_bounds: k must be non-negative");
    }
    WindowBounds b;
    b.start = cfg.t0 + cfg.advance * k;
    b.learning = {b.start, b.start + cfg.learning};
    b.delay = {b.learning.end, b.learning.end + cfg.delay};
    b.forecast = {b.delay.end, b.delay.end + cfg.horizon};
    return b;
}

int count_windows(const WindowConfig& cfg, std::size_t series_length)
{
    const auto len = static_cast<long>(series_length);
    if (cfg.t0 + cfg.learning > len) {
        return 0;
    }
    int n = static_cast<int>((len - cfg.t0 - cfg.learning) / cfg.advance) + 1;
    if (cfg.max_windows) {
        n = std::min(n, *cfg.max_windows);
    }
    return n;
}

void AssimilationOptions::validate() const
{
    EpiParams<double> probe = fixed;
    probe.beta = 1.0;
    probe.omega = 0.5;
    probe.g = 0.5;
    if (!probe.valid()) {
        throw std::invalid_argument("AssimilationOptions: invalid fixed model constants");
    }
    obs.validate();
    sampler.validate();
    if (!(inflation >= 1.0)) {
        throw std::invalid_argument("AssimilationOptions: inflation must be >= 1");
    }
    if (!(step > 0.0)) {
        throw std::invalid_argument("AssimilationOptions: step must be positive");
    }
    if (max_init_tries < 1) {
        throw std::invalid_argument("AssimilationOptions: max_init_tries must be >= 1");
    }
}

ParamSummary summarize(const Eigen::Ref<const Eigen::VectorXd>& draws)
{
    std::vector<double> v(draws.data(), draws.data() + draws.size());
    std::sort(v.begin(), v.end());
    return {quantile_sorted(v, 0.5), quantile_sorted(v, 0.05), quantile_sorted(v, 0.95)};
}

QuantileTable band_quantiles(const Eigen::MatrixXd& per_day_draws)
{
    QuantileTable out(per_day_draws.rows(), 5);
    std::vector<double> row(static_cast<std::size_t>(per_day_draws.cols()));
    for (Eigen::Index d = 0; d < per_day_draws.rows(); ++d) {
        for (Eigen::Index j = 0; j < per_day_draws.cols(); ++j) {
            row[static_cast<std::size_t>(j)] = per_day_draws(d, j);
        }
        std::sort(row.begin(), row.end());
        for (Eigen::Index q = 0; q < 5; ++q) {
            out(d, q) = quantile_sorted(row, kBandLevels[static_cast<std::size_t>(q)]);
        }
    }
    return out;
}

LogDensity make_log_posterior(const EpidemicSeries& learning_data, const PriorSpec& prior,
                              const AssimilationOptions& opts)
{
    const int days = static_cast<int>(learning_data.size());
    return [learning_data, prior, opts, days](const Eigen::VectorXd& v) -> double {
        const InferenceVector iv = v;
        const double lp = prior_log_density(prior, iv, opts.fixed);
        if (!std::isfinite(lp)) {
            return kNegInf;
        }
        const auto traj = solve_draw(iv, opts, days);
        if (!traj) {
            return kNegInf;
        }
        const EpiParams<double> p = with_inferred(opts.fixed, iv);
        return lp + log_likelihood(learning_data, *traj, p, opts.obs);
    };
}

PosteriorSamples assimilate_window(const EpidemicSeries& learning_data, const PriorSpec& prior,
                                   const AssimilationOptions& opts, Rng& rng)
{
    if (learning_data.size() == 0) {
        throw std::invalid_argument("assimilate_window: empty learning period");
    }
    const LogDensity target = make_log_posterior(learning_data, prior, opts);

    auto draw_start = [&]() -> Eigen::VectorXd {
        for (int attempt = 0; attempt < opts.max_init_tries; ++attempt) {
            const Eigen::VectorXd v = sample_prior(prior, rng);
            if (std::isfinite(target(v))) {
                return v;
            }
        }
        throw InitializationFailed("no prior draw with finite log posterior after " +
                                   std::to_string(opts.max_init_tries) + " attempts");
    };
    const Eigen::VectorXd a = draw_start();
    Eigen::VectorXd b = draw_start();
    while (((a - b).array() == 0.0).any()) {
        b = draw_start();
    }
    return run_mcmc(target, a, b, opts.sampler, rng);
}

StatePrior propagate_state_prior(const PosteriorSamples& post, int advance, const AssimilationOptions& opts)
{
    if (advance < 0) {
        throw std::invalid_argument("propagate_state_prior: advance must be non-negative");
    }
    using C = Compartment;
    StatePrior out;
    std::vector<Eigen::Matrix<double, 5, 1>> kept;
    kept.reserve(static_cast<std::size_t>(post.draws.rows()));

    for (Eigen::Index i = 0; i < post.draws.rows(); ++i) {
        const InferenceVector v = post.draws.row(i).transpose();
        const EpiParams<double> p = with_inferred(opts.fixed, v);
        if (!p.valid()) {
            ++out.dropped;
            continue;
        }
        StateVector<double> x;
        if (advance == 0) {
            const auto x0 = try_assemble_initial_state(initial_conditions(v), p);
            if (!x0) {
                ++out.dropped;
                continue;
            }
            x = *x0;
        }
        else {
            const auto traj = solve_draw(v, opts, advance);
            if (!traj) {
                ++out.dropped;
                continue;
            }
            x = traj->states.col(advance);
        }
        Eigen::Matrix<double, 5, 1> agg;
        agg << exposed(x), observed_infectious(x), unobserved_infectious(x), x(idx(C::R)), x(idx(C::D));
        // The next window derives S from omega*N; it must stay non-negative.
        if (p.omega * p.N - agg.head<4>().sum() < 0.0) {
            ++out.dropped;
            continue;
        }
        kept.push_back(agg);
    }

    out.propagated.resize(static_cast<Eigen::Index>(kept.size()), 5);
    for (std::size_t i = 0; i < kept.size(); ++i) {
        out.propagated.row(static_cast<Eigen::Index>(i)) = kept[i].transpose();
    }
    for (Eigen::Index j = 0; j < 5; ++j) {
        const auto col = column(out.propagated, j);
        try {
            out.dists.push_back(fit_moments(col, Family::Gamma));
        }
        catch (const FitDegenerate& e) {
            throw FitDegenerate(std::string("state prior for ") + coord_name(static_cast<Coord>(j)) + ": " +
                                e.what());
        }
    }
    return out;
}

std::vector<Distribution1D> autoregressive_theta_prior(const PosteriorSamples& post, double kappa)
{
    if (!(kappa >= 1.0)) {
        throw std::invalid_argument("autoregressive_theta_prior: kappa must be >= 1");
    }
    constexpr std::array<std::pair<Coord, Family>, 3> coords{
        {{Coord::Beta, Family::LogNormal}, {Coord::Omega, Family::Beta}, {Coord::G, Family::Beta}}};
    std::vector<Distribution1D> out;
    for (const auto& [coord, family] : coords) {
        const auto col = column(post.draws, idx(coord));
        if (col.size() < kMinFitSamples) {
            throw FitDegenerate(std::string("theta prior for ") + coord_name(coord) + ": too few draws");
        }
        const SampleMoments m = sample_moments(col);
        if (!(m.variance > 1e-12 * m.mean * m.mean)) {
            throw FitDegenerate(std::string("theta prior for ") + coord_name(coord) + ": posterior is degenerate");
        }
        try {
            out.push_back(moment_match(family, m.mean, kappa * kappa * m.variance));
        }
        catch (const FitDegenerate& e) {
            throw FitDegenerate(std::string("theta prior for ") + coord_name(coord) + ": " + e.what());
        }
    }
    return out;
}

PriorSpec assemble_prior(const std::vector<Distribution1D>& state, const std::vector<Distribution1D>& theta)
{
    if (state.size() != 5 || theta.size() != 3) {
        throw std::invalid_argument("assemble_prior: need 5 state and 3 parameter distributions");
    }
    return PriorSpec{{state[0], state[1], state[2], state[3], state[4], theta[0], theta[1], theta[2]}};
}

ForecastResult forecast(const PosteriorSamples& post, const WindowConfig& cfg, int k,
                        const AssimilationOptions& opts, Rng& rng)
{
    const WindowBounds b = window_bounds(cfg, k);
    const int local_begin = b.forecast.begin - b.start;
    const int days = b.forecast.end - b.start;
    const int horizon = b.forecast.length();
    const Eigen::Index n_draws = post.draws.rows();

    Eigen::MatrixXd case_draws(horizon, n_draws);
    Eigen::MatrixXd death_draws(horizon, n_draws);
    Eigen::Index kept = 0;
    int dropped = 0;
    for (Eigen::Index i = 0; i < n_draws; ++i) {
        const InferenceVector v = post.draws.row(i).transpose();
        const auto traj = solve_draw(v, opts, days);
        if (!traj) {
            ++dropped;
            continue;
        }
        const EpiParams<double> p = with_inferred(opts.fixed, v);
        const Eigen::VectorXd mu_c = expected_cases(*traj, p).segment(local_begin, horizon);
        const Eigen::VectorXd mu_d = expected_deaths(*traj).segment(local_begin, horizon);
        for (int d = 0; d < horizon; ++d) {
            if (opts.predictive_noise) {
                case_draws(d, kept) = static_cast<double>(nb_sample(mu_c(d), opts.obs, rng));
                death_draws(d, kept) = static_cast<double>(nb_sample(mu_d(d), opts.obs, rng));
            }
            else {
                case_draws(d, kept) = std::max(0.0, mu_c(d));
                death_draws(d, kept) = std::max(0.0, mu_d(d));
            }
        }
        ++kept;
    }
    if (n_draws == 0 || static_cast<double>(dropped) > opts.max_dropped_fraction * static_cast<double>(n_draws)) {
        throw ForecastUnstable(std::to_string(dropped) + " of " + std::to_string(n_draws) +
                               " posterior draws failed to integrate");
    }

    ForecastResult out;
    out.window = k;
    out.window_start = b.start;
    out.forecast_day = b.forecast.begin;
    out.cases = band_quantiles(case_draws.leftCols(kept));
    out.deaths = band_quantiles(death_draws.leftCols(kept));
    out.theta = {summarize(post.draws.col(idx(Coord::Beta))), summarize(post.draws.col(idx(Coord::Omega))),
                 summarize(post.draws.col(idx(Coord::G)))};
    out.dropped_draws = dropped;
    return out;
}

Rng window_rng(std::uint64_t seed, int k)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(k)};
    return Rng(seq);
}

SequentialResult run_sequential(const EpidemicSeries& series, const WindowConfig& cfg,
                                const AssimilationOptions& opts)
{
    cfg.validate();
    opts.validate();
    series.validate();
    const int n_windows = count_windows(cfg, series.size());
    if (n_windows == 0) {
        throw std::invalid_argument("run_sequential: series shorter than one learning period");
    }

    SequentialResult result;
    PriorSpec prior = opts.initial_prior;
    int propagation_dropped = 0;
    for (int k = 0; k < n_windows; ++k) {
        int failing = k;
        try {
            const WindowBounds b = window_bounds(cfg, k);
            Rng rng = window_rng(opts.seed, k);
            const EpidemicSeries data = series.slice(static_cast<std::size_t>(b.learning.begin),
                                                     static_cast<std::size_t>(b.learning.length()));
            PosteriorSamples post = assimilate_window(data, prior, opts, rng);
            ForecastResult fc = forecast(post, cfg, k, opts, rng);
            result.windows.push_back({std::move(fc), std::move(post), propagation_dropped});

            if (k + 1 < n_windows) {
                // A failure here belongs to the window whose prior is being built.
                failing = k + 1;
                const PosteriorSamples& last = result.windows.back().posterior;
                const StatePrior state = propagate_state_prior(last, cfg.advance, opts);
                prior = assemble_prior(state.dists, autoregressive_theta_prior(last, opts.inflation));
                propagation_dropped = state.dropped;
            }
        }
        catch (const Error& e) {
            result.failure = WindowFailure{failing, e.kind(), e.what()};
            break;
        }
    }
    return result;
}

} // namespace epiassim
