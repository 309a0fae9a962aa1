#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "epiassim/assimilation.hpp"
#include "epiassim/cli/simulate.hpp"
#include "epiassim/errors.hpp"
#include "epiassim/stats.hpp"

using namespace epiassim;

namespace {

SamplerConfig quick_sampler()
{
    SamplerConfig s;
    s.iters = 20000;
    s.burn_in = 5000;
    s.thin = 15;
    return s;
}

AssimilationOptions quick_options(double N = 1e6)
{
    AssimilationOptions o;
    o.fixed.N = N;
    o.sampler = quick_sampler();
    return o;
}

SyntheticTruth growing_truth(int days, std::uint64_t seed)
{
    SyntheticTruth t;
    t.params.beta = 0.45;
    t.params.omega = 0.5;
    t.params.g = 0.05;
    t.params.N = 1e6;
    t.ic = {10, 10, 10, 1, 0};
    t.days = days;
    t.seed = seed;
    return t;
}

// Posterior stand-in: draws from a fixed product distribution.
PosteriorSamples synthetic_posterior(int n, std::uint64_t seed)
{
    PriorSpec ps{{Distribution1D::gamma(20, 1), Distribution1D::gamma(15, 1), Distribution1D::gamma(30, 1),
                  Distribution1D::gamma(5, 1), Distribution1D::gamma(2, 1),
                  Distribution1D::lognormal(std::log(0.3), 0.1), Distribution1D::beta(20, 15),
                  Distribution1D::beta(5, 95)}};
    Rng rng(seed);
    PosteriorSamples post;
    post.draws.resize(n, kNumCoords);
    for (int i = 0; i < n; ++i) {
        post.draws.row(i) = sample_prior(ps, rng).transpose();
    }
    post.log_posts = Eigen::VectorXd::Zero(n);
    return post;
}

double column_variance(const Eigen::MatrixXd& m, Eigen::Index j)
{
    const Eigen::VectorXd c = m.col(j);
    return sample_moments(std::span<const double>(c.data(), static_cast<std::size_t>(c.size()))).variance;
}

void check_monotone(const QuantileTable& t)
{
    CHECK(t.allFinite());
    CHECK((t.array() >= 0.0).all());
    for (Eigen::Index d = 0; d < t.rows(); ++d) {
        for (Eigen::Index q = 0; q + 1 < 5; ++q) {
            CHECK(t(d, q) <= t(d, q + 1));
        }
    }
}

} // namespace

TEST_CASE("window_bounds")
{
    WindowConfig cfg;
    const auto b0 = window_bounds(cfg, 0);
    CHECK(b0.learning == Interval{0, 28});
    CHECK(b0.delay == Interval{28, 35});
    CHECK(b0.forecast == Interval{35, 49});
    CHECK(window_bounds(cfg, 1).start == 7);
    CHECK_THROWS_AS(window_bounds(cfg, -1), std::invalid_argument);
}

TEST_CASE("window intervals are contiguous and overlap by L - n")
{
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> len(1, 40);
    for (int trial = 0; trial < 200; ++trial) {
        WindowConfig cfg;
        cfg.t0 = len(rng) - 1;
        cfg.learning = len(rng);
        cfg.delay = len(rng);
        cfg.horizon = len(rng);
        cfg.advance = std::uniform_int_distribution<int>(1, cfg.learning)(rng);
        for (int k = 0; k < 10; ++k) {
            const auto b = window_bounds(cfg, k);
            const auto next = window_bounds(cfg, k + 1);
            CHECK(b.start == cfg.t0 + cfg.advance * k);
            CHECK(b.learning.begin == b.start);
            CHECK(b.learning.end == b.delay.begin);
            CHECK(b.delay.end == b.forecast.begin);
            CHECK(b.learning.length() == cfg.learning);
            CHECK(b.delay.length() == cfg.delay);
            CHECK(b.forecast.length() == cfg.horizon);
            CHECK(b.learning.end - next.learning.begin == cfg.learning - cfg.advance);
        }
    }
}

TEST_CASE("count_windows")
{
    WindowConfig cfg;
    CHECK(count_windows(cfg, 27) == 0);
    CHECK(count_windows(cfg, 28) == 1);
    CHECK(count_windows(cfg, 34) == 1);
    CHECK(count_windows(cfg, 35) == 2);
    CHECK(count_windows(cfg, 150) == 18);
    cfg.max_windows = 3;
    CHECK(count_windows(cfg, 150) == 3);
    cfg.max_windows.reset();
    cfg.t0 = 10;
    CHECK(count_windows(cfg, 37) == 0);
    CHECK(count_windows(cfg, 38) == 1);
}

TEST_CASE("WindowConfig validation")
{
    WindowConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    for (int WindowConfig::*field : {&WindowConfig::learning, &WindowConfig::delay, &WindowConfig::horizon,
                                     &WindowConfig::advance}) {
        WindowConfig bad;
        bad.*field = 0;
        CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    }
    cfg.advance = cfg.learning + 1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("zero-length propagation fits the posterior initial conditions")
{
    const auto post = synthetic_posterior(5000, 1);
    const auto opts = quick_options();
    const StatePrior sp = propagate_state_prior(post, 0, opts);
    CHECK(sp.dropped == 0);
    REQUIRE(sp.dists.size() == 5);
    for (Eigen::Index j = 0; j < 5; ++j) {
        const Eigen::VectorXd col = post.draws.col(j);
        const auto direct = fit_moments(std::span<const double>(col.data(), static_cast<std::size_t>(col.size())),
                                        Family::Gamma);
        CHECK(sp.dists[static_cast<std::size_t>(j)].params()[0] == doctest::Approx(direct.params()[0]).epsilon(1e-12));
        CHECK(sp.dists[static_cast<std::size_t>(j)].params()[1] == doctest::Approx(direct.params()[1]).epsilon(1e-12));
    }
}

TEST_CASE("propagated priors reproduce the propagated sample means")
{
    const auto post = synthetic_posterior(3000, 2);
    const auto opts = quick_options();
    const StatePrior sp = propagate_state_prior(post, 7, opts);
    REQUIRE(sp.propagated.rows() == 3000 - sp.dropped);
    for (Eigen::Index j = 0; j < 5; ++j) {
        const auto& d = sp.dists[static_cast<std::size_t>(j)];
        CHECK(d.family() == Family::Gamma);
        CHECK(d.params()[0] > 0.0);
        CHECK(d.params()[1] > 0.0);
        const double mean = sp.propagated.col(j).mean();
        CHECK(std::abs(d.mean() - mean) <= 1e-6 * mean);
        CHECK(d.variance() == doctest::Approx(column_variance(sp.propagated, j)).epsilon(1e-9));
    }
    // After a week the infection has moved out of the exposed stage and
    // recovered mass has grown.
    CHECK(sp.dists[3].mean() > post.draws.col(3).mean());
}

TEST_CASE("propagation drops draws whose state no longer fits omega * N")
{
    auto post = synthetic_posterior(400, 3);
    auto opts = quick_options(200.0);
    // With N = 200 the initial masses alone exceed omega * N for many draws.
    const StatePrior sp = propagate_state_prior(post, 3, opts);
    CHECK(sp.dropped > 0);
    CHECK(sp.propagated.rows() == 400 - sp.dropped);
}

TEST_CASE("autoregressive theta prior")
{
    const auto post = synthetic_posterior(100000, 4);
    SUBCASE("kappa = 1 keeps the posterior variance")
    {
        const auto prior = autoregressive_theta_prior(post, 1.0);
        for (std::size_t i = 0; i < 3; ++i) {
            const Eigen::Index j = idx(Coord::Beta) + static_cast<Eigen::Index>(i);
            CHECK(prior[i].variance() == doctest::Approx(column_variance(post.draws, j)).epsilon(1e-9));
            CHECK(prior[i].mean() == doctest::Approx(post.draws.col(j).mean()).epsilon(1e-9));
        }
        CHECK(prior[0].family() == Family::LogNormal);
        CHECK(prior[1].family() == Family::Beta);
        CHECK(prior[2].family() == Family::Beta);
    }
    SUBCASE("kappa = 2 quadruples the variance")
    {
        const auto prior = autoregressive_theta_prior(post, 2.0);
        for (std::size_t i = 0; i < 3; ++i) {
            const Eigen::Index j = idx(Coord::Beta) + static_cast<Eigen::Index>(i);
            CHECK(prior[i].variance() == doctest::Approx(4.0 * column_variance(post.draws, j)).epsilon(0.05));
        }
        CHECK(prior[0].mean() == doctest::Approx(post.draws.col(idx(Coord::Beta)).mean()).epsilon(0.01));
    }
    SUBCASE("large inflation of a Beta marginal stays a valid distribution")
    {
        const auto prior = autoregressive_theta_prior(post, 50.0);
        CHECK(prior[1].params()[0] >= kBetaParamFloor);
        CHECK(prior[1].params()[1] >= kBetaParamFloor);
    }
    CHECK_THROWS_AS(autoregressive_theta_prior(post, 0.5), std::invalid_argument);

    auto constant = post;
    constant.draws.col(idx(Coord::Omega)).setConstant(0.4);
    CHECK_THROWS_AS(autoregressive_theta_prior(constant, 1.5), FitDegenerate);
}

TEST_CASE("forecast bands")
{
    const auto post = synthetic_posterior(400, 5);
    WindowConfig cfg;
    auto opts = quick_options();

    SUBCASE("predictive bands are monotone and non-negative")
    {
        Rng rng(1);
        const auto fc = forecast(post, cfg, 2, opts, rng);
        CHECK(fc.window == 2);
        CHECK(fc.window_start == 14);
        CHECK(fc.forecast_day == 49);
        CHECK(fc.horizon() == 14);
        CHECK(fc.dropped_draws == 0);
        check_monotone(fc.cases);
        check_monotone(fc.deaths);
        CHECK(fc.theta[0].q05 <= fc.theta[0].median);
        CHECK(fc.theta[0].median <= fc.theta[0].q95);
    }
    SUBCASE("without noise the median is the median expected count")
    {
        opts.predictive_noise = false;
        Rng rng(1);
        const auto fc = forecast(post, cfg, 0, opts, rng);
        // Oracle: integrate each draw directly.
        const int days = 49;
        std::vector<std::vector<double>> mu_d(14);
        for (Eigen::Index i = 0; i < post.draws.rows(); ++i) {
            const InferenceVector v = post.draws.row(i).transpose();
            const auto p = with_inferred(opts.fixed, v);
            const auto traj = integrate(assemble_initial_state(initial_conditions(v), p), p, 0, days);
            const Eigen::VectorXd d = expected_deaths(traj);
            for (int t = 0; t < 14; ++t) {
                mu_d[static_cast<std::size_t>(t)].push_back(d(35 + t));
            }
        }
        for (int t = 0; t < 14; ++t) {
            CHECK(fc.deaths(t, 2) == doctest::Approx(quantile(mu_d[static_cast<std::size_t>(t)], 0.5)).epsilon(1e-12));
        }
    }
}

TEST_CASE("forecast drops diverging draws and fails above one percent")
{
    auto post = synthetic_posterior(300, 6);
    const auto opts = quick_options();
    WindowConfig cfg;
    auto poison = [&](int rows) {
        for (int i = 0; i < rows; ++i) {
            post.draws(i, idx(Coord::Beta)) = 1e5;
            post.draws.block(i, 0, 1, 3).setConstant(1e5);
        }
    };
    poison(3);
    Rng rng(2);
    CHECK(forecast(post, cfg, 0, opts, rng).dropped_draws == 3);
    poison(10);
    CHECK_THROWS_AS(forecast(post, cfg, 0, opts, rng), ForecastUnstable);
}

TEST_CASE("an all-zero window completes with a contact rate below the prior median")
{
    EpidemicSeries zeros;
    zeros.cases.assign(28, 0);
    zeros.deaths.assign(28, 0);
    const auto opts = quick_options();
    Rng rng(11);
    const auto post = assimilate_window(zeros, opts.initial_prior, opts, rng);
    CHECK(post.draws.allFinite());
    CHECK(summarize(post.draws.col(idx(Coord::Beta))).median < std::exp(1.0));
    const auto fc = forecast(post, WindowConfig{}, 0, opts, rng);
    check_monotone(fc.cases);
    check_monotone(fc.deaths);
}

TEST_CASE("retained draws respect the effective-population constraint")
{
    EpidemicSeries zeros;
    zeros.cases.assign(28, 0);
    zeros.deaths.assign(28, 0);
    const auto opts = quick_options(150.0);
    Rng rng(12);
    const auto post = assimilate_window(zeros, opts.initial_prior, opts, rng);
    for (Eigen::Index i = 0; i < post.draws.rows(); ++i) {
        const auto v = post.draws.row(i);
        CHECK(v.head(4).sum() <= v(idx(Coord::Omega)) * 150.0);
        CHECK((v.array() > 0.0).all());
        CHECK(v(idx(Coord::Omega)) < 1.0);
        CHECK(v(idx(Coord::G)) < 1.0);
    }
}

TEST_CASE("initialization fails when no prior draw is feasible")
{
    EpidemicSeries zeros;
    zeros.cases.assign(10, 0);
    zeros.deaths.assign(10, 0);
    auto opts = quick_options(50.0);
    opts.max_init_tries = 20;
    PriorSpec prior = default_prior();
    prior.coords[0] = Distribution1D::gamma(1000, 1);
    Rng rng(1);
    CHECK_THROWS_AS(assimilate_window(zeros, prior, opts, rng), InitializationFailed);
}

TEST_CASE("propagated exposed prior tracks the true exposed mass")
{
    auto truth = growing_truth(28, 21);
    const auto data = simulate_synthetic(truth);
    auto opts = quick_options();
    opts.sampler.iters = 100000;
    opts.sampler.burn_in = 30000;
    opts.sampler.thin = 35;
    Rng rng(5);
    const auto post = assimilate_window(data.series, opts.initial_prior, opts, rng);
    const auto sp = propagate_state_prior(post, 7, opts);

    const auto x0 = assemble_initial_state(truth.ic, truth.params);
    const auto traj = integrate(x0, truth.params, 0, 7);
    const double true_e = exposed(StateVector<double>(traj.states.col(7)));
    INFO("fitted E mean " << sp.dists[0].mean() << " truth " << true_e);
    CHECK(std::abs(sp.dists[0].mean() - true_e) <= 0.1 * true_e);
}

TEST_CASE("run_sequential window counts and reproducibility")
{
    const auto data = simulate_synthetic(growing_truth(35, 7)).series;
    const auto opts = quick_options();
    WindowConfig cfg;

    const auto one = run_sequential(data.slice(0, 28), cfg, opts);
    CHECK(one.ok());
    CHECK(one.windows.size() == 1);

    const auto two = run_sequential(data, cfg, opts);
    REQUIRE(two.ok());
    REQUIRE(two.windows.size() == 2);
    CHECK(two.windows[1].forecast.window_start == 7);
    check_monotone(two.windows[1].forecast.cases);

    const auto again = run_sequential(data, cfg, opts);
    CHECK(again.windows[1].posterior.draws == two.windows[1].posterior.draws);
    CHECK(again.windows[1].forecast.cases == two.windows[1].forecast.cases);

    // The first window does not depend on how many follow it.
    CHECK(one.windows[0].posterior.draws == two.windows[0].posterior.draws);
}

TEST_CASE("run_sequential keeps completed windows when a later one fails")
{
    const auto data = simulate_synthetic(growing_truth(35, 8)).series;
    auto opts = quick_options();
    // Too few draws to fit the next window's prior.
    opts.sampler.iters = 2000;
    opts.sampler.burn_in = 0;
    opts.sampler.thin = 40;
    opts.sampler.min_draws = 10;
    const auto res = run_sequential(data, WindowConfig{}, opts);
    CHECK_FALSE(res.ok());
    CHECK(res.windows.size() == 1);
    REQUIRE(res.failure.has_value());
    CHECK(res.failure->window == 1);
    CHECK(res.failure->kind == "fit-degenerate");
}

TEST_CASE("run_sequential reports a failing first window")
{
    const auto data = simulate_synthetic(growing_truth(28, 9)).series;
    auto opts = quick_options();
    opts.max_init_tries = 5;
    opts.initial_prior.coords[0] = Distribution1D::gamma(1e8, 1.0);
    const auto res = run_sequential(data, WindowConfig{}, opts);
    CHECK(res.windows.empty());
    REQUIRE(res.failure.has_value());
    CHECK(res.failure->window == 0);
    CHECK(res.failure->kind == "initialization-failed");
}

TEST_CASE("window generators differ across windows and seeds")
{
    Rng a = window_rng(1, 0);
    Rng b = window_rng(1, 1);
    Rng c = window_rng(2, 0);
    Rng a2 = window_rng(1, 0);
    const auto va = a();
    CHECK(va == a2());
    CHECK(va != b());
    CHECK(va != c());
}
