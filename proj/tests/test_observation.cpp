#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "epiassim/epimodel.hpp"
#include "epiassim/observation.hpp"
#include "epiassim/odeint.hpp"

using namespace epiassim;
using C = Compartment;

namespace {

Trajectory<double> trajectory_with_d(const std::vector<double>& d_values)
{
    Trajectory<double> t;
    const auto n = static_cast<Eigen::Index>(d_values.size());
    t.states = Eigen::MatrixXd::Zero(kNumCompartments, n);
    t.e2_nodes = Eigen::MatrixXd::Zero(kQuadNodes, n - 1);
    for (Eigen::Index j = 0; j < n; ++j) {
        t.states(idx(C::D), j) = d_values[static_cast<std::size_t>(j)];
    }
    return t;
}

EpiParams<double> truth_params()
{
    EpiParams<double> p;
    p.beta = 0.25;
    p.omega = 0.6;
    p.g = 0.05;
    p.N = 1e6;
    return p;
}

StateVector<double> truth_state(const EpiParams<double>& p)
{
    return assemble_initial_state(InitialConditions<double>{10, 10, 10, 1, 0}, p);
}

// Aggregate-staged model with an extra state accumulating the inflow into
// O, integrated by a plain fine-step RK4. Independent of the library's
// flow/quadrature code path.
double cumulative_observed_inflow(const EpiParams<double>& p, const StateVector<double>& x0, int days)
{
    using V = Eigen::Matrix<double, 10, 1>;
    const double re = 2.0 * p.sigma1;
    const double ro = 2.0 * p.sigma2;
    const double ru = 2.0 * p.gamma;
    auto f = [&](const V& x) {
        const double S = x(0), E1 = x(1), E2 = x(2), O1 = x(3), O2 = x(4), U1 = x(5), U2 = x(6);
        const double lambda = p.beta * (U1 + U2 + p.k_obs * (O1 + O2)) / p.N;
        V d;
        d << -lambda * S, lambda * S - re * E1, re * E1 - re * E2, p.f * re * E2 - ro * O1, ro * O1 - ro * O2,
            (1 - p.f) * re * E2 - ru * U1, ru * U1 - ru * U2, (1 - p.g) * ro * O2 + ru * U2, p.g * ro * O2,
            p.f * re * E2;
        return d;
    };
    V x;
    x.head<9>() = x0;
    x(9) = 0.0;
    const int n = days * 400;
    const double h = 1.0 / 400.0;
    for (int i = 0; i < n; ++i) {
        const V k1 = f(x);
        const V k2 = f(x + 0.5 * h * k1);
        const V k3 = f(x + 0.5 * h * k2);
        const V k4 = f(x + h * k3);
        x += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    return x(9);
}

double poisson_logpmf(int y, double m)
{
    return y * std::log(m) - m - std::lgamma(y + 1.0);
}

} // namespace

TEST_CASE("expected_deaths differences cumulative deaths")
{
    CHECK(expected_deaths(trajectory_with_d({5, 5, 5, 5})).isZero(0.0));
    const Eigen::VectorXd mu = expected_deaths(trajectory_with_d({0, 3, 7}));
    REQUIRE(mu.size() == 2);
    CHECK(mu(0) == 3.0);
    CHECK(mu(1) == 4.0);
}

TEST_CASE("expected deaths telescope and stay non-negative")
{
    const auto p = truth_params();
    const auto traj = integrate(truth_state(p), p, 0, 150);
    const Eigen::VectorXd mu = expected_deaths(traj);
    CHECK((mu.array() >= 0.0).all());
    const double span = traj.states(idx(C::D), 150) - traj.states(idx(C::D), 0);
    CHECK(mu.sum() == doctest::Approx(span).epsilon(1e-12));
}

TEST_CASE("expected_cases integrates the staged inflow into O")
{
    EpiParams<double> p;
    Trajectory<double> t = trajectory_with_d({0, 0, 0});
    t.e2_nodes.col(1).setConstant(40.0);
    const Eigen::VectorXd mu = expected_cases(t, p);
    CHECK(mu(0) == 0.0);
    CHECK(mu(1) == doctest::Approx(p.f * 2.0 * p.sigma1 * 40.0).epsilon(1e-14));
}

TEST_CASE("summed expected cases match the cumulative-inflow oracle")
{
    const auto p = truth_params();
    const auto x0 = truth_state(p);
    const auto traj = integrate(x0, p, 0, 100);
    const double oracle = cumulative_observed_inflow(p, x0, 100);
    const double total = expected_cases(traj, p).sum();
    INFO("oracle " << oracle << " quadrature " << total);
    CHECK(std::abs(total - oracle) <= 1e-4 * oracle);
}

TEST_CASE("nb_logpmf approaches Poisson")
{
    ObsConfig cfg;
    cfg.omega_over = 1.0;
    cfg.theta_over = 1e-10;
    CHECK(std::abs(nb_logpmf(3, 2.0, cfg) - poisson_logpmf(3, 2.0)) < 1e-6);
    cfg.theta_over = 1e-14;
    for (int y : {0, 1, 7, 40}) {
        CHECK(std::abs(nb_logpmf(y, 11.5, cfg) - poisson_logpmf(y, 11.5)) < 1e-6);
    }
}

TEST_CASE("nb_logpmf is a normalized pmf with the right mean")
{
    ObsConfig cfg;
    cfg.omega_over = 2.0;
    cfg.theta_over = 0.1;
    double mass = 0.0;
    double first = 0.0;
    double second = 0.0;
    for (int y = 0; y <= 10000; ++y) {
        const double pmf = std::exp(nb_logpmf(y, 4.0, cfg));
        mass += pmf;
        first += y * pmf;
        second += static_cast<double>(y) * y * pmf;
    }
    CHECK(std::abs(mass - 1.0) < 1e-8);
    CHECK(std::abs(first - 4.0) < 1e-6);
    const double var = second - first * first;
    CHECK(var == doctest::Approx(2.0 * 4.0 + 0.1 * 16.0).epsilon(1e-6));
}

TEST_CASE("reporting probability scales the mean")
{
    ObsConfig full;
    ObsConfig half;
    half.p_report = 0.5;
    for (int y : {0, 3, 50}) {
        CHECK(nb_logpmf(y, 20.0, half) == doctest::Approx(nb_logpmf(y, 10.0, full)).epsilon(1e-13));
    }
}

TEST_CASE("zero mean is floored to a finite log-likelihood")
{
    ObsConfig cfg;
    CHECK(std::isfinite(nb_logpmf(0, 0.0, cfg)));
    CHECK(std::isfinite(nb_logpmf(3, 0.0, cfg)));
    CHECK(nb_logpmf(0, 0.0, cfg) > -1e-6);
}

TEST_CASE("nb_sample moments")
{
    ObsConfig cfg;
    std::mt19937_64 rng(3);
    const double m = 50.0;
    std::vector<double> ys(100000);
    for (auto& y : ys) {
        y = static_cast<double>(nb_sample(m, cfg, rng));
    }
    const double mean = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
    double var = 0.0;
    for (double y : ys) {
        var += (y - mean) * (y - mean);
    }
    var /= ys.size() - 1;
    CHECK(mean == doctest::Approx(m).epsilon(0.01));
    CHECK(var == doctest::Approx(cfg.omega_over * m + cfg.theta_over * m * m).epsilon(0.03));
}

TEST_CASE("log_likelihood basics")
{
    ObsConfig cfg;
    EpidemicSeries empty;
    CHECK(log_likelihood(empty, Eigen::VectorXd(), Eigen::VectorXd(), cfg) == 0.0);

    EpidemicSeries one;
    one.cases = {7};
    one.deaths = {1};
    Eigen::VectorXd mc(1), md(1);
    mc << 6.5;
    md << 0.3;
    CHECK(log_likelihood(one, mc, md, cfg) ==
          doctest::Approx(nb_logpmf(7, 6.5, cfg) + nb_logpmf(1, 0.3, cfg)).epsilon(1e-15));

    EpidemicSeries too_long;
    too_long.cases = {1, 2};
    too_long.deaths = {0, 0};
    CHECK_THROWS_AS(log_likelihood(too_long, mc, md, cfg), std::invalid_argument);
}

TEST_CASE("log_likelihood does not depend on summation order")
{
    ObsConfig cfg;
    std::mt19937_64 rng(5);
    const int n = 200;
    EpidemicSeries s;
    Eigen::VectorXd mc(n), md(n);
    std::uniform_real_distribution<double> u(0.0, 5000.0);
    for (int i = 0; i < n; ++i) {
        mc(i) = u(rng);
        md(i) = u(rng) / 50.0;
        s.cases.push_back(nb_sample(mc(i), cfg, rng));
        s.deaths.push_back(nb_sample(md(i), cfg, rng));
    }
    const double forward = log_likelihood(s, mc, md, cfg);

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    EpidemicSeries t;
    Eigen::VectorXd tc(n), td(n);
    for (int i = 0; i < n; ++i) {
        t.cases.push_back(s.cases[order[i]]);
        t.deaths.push_back(s.deaths[order[i]]);
        tc(i) = mc(order[i]);
        td(i) = md(order[i]);
    }
    CHECK(std::abs(log_likelihood(t, tc, td, cfg) - forward) < 1e-9);
}

TEST_CASE("the likelihood prefers the generating contact rate")
{
    ObsConfig cfg;
    const auto p = truth_params();
    const auto x0 = truth_state(p);
    const int days = 60;
    const auto traj = integrate(x0, p, 0, days);
    const Eigen::VectorXd mc = expected_cases(traj, p);
    const Eigen::VectorXd md = expected_deaths(traj);

    auto perturbed = p;
    perturbed.beta *= 1.5;
    const auto traj_b = integrate(x0, perturbed, 0, days);
    const Eigen::VectorXd mc_b = expected_cases(traj_b, perturbed);
    const Eigen::VectorXd md_b = expected_deaths(traj_b);

    int wins = 0;
    for (int rep = 0; rep < 100; ++rep) {
        std::mt19937_64 rng(1000 + rep);
        EpidemicSeries s;
        for (int d = 0; d < days; ++d) {
            s.cases.push_back(nb_sample(mc(d), cfg, rng));
            s.deaths.push_back(nb_sample(md(d), cfg, rng));
        }
        if (log_likelihood(s, mc, md, cfg) > log_likelihood(s, mc_b, md_b, cfg)) {
            ++wins;
        }
    }
    CHECK(wins >= 95);
}

TEST_CASE("ObsConfig validation")
{
    ObsConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.p_report = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.theta_over = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.omega_over = 0.5;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("series slicing and validation")
{
    EpidemicSeries s;
    s.start_date = Date{std::chrono::year{2020} / 3 / 30};
    s.cases = {1, 2, 3, 4};
    s.deaths = {0, 0, 1, 0};
    const auto sl = s.slice(2, 2);
    CHECK(sl.cases == std::vector<std::int64_t>{3, 4});
    CHECK(format_date(sl.start_date) == "2020-04-01");
    CHECK_THROWS_AS(s.slice(3, 2), std::out_of_range);
    s.deaths.pop_back();
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}
