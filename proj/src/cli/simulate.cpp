#include "epiassim/cli/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include "epiassim/cli/series_io.hpp"
#include "epiassim/errors.hpp"
#include "epiassim/odeint.hpp"

namespace epiassim {

void SyntheticTruth::validate() const
{
    if (!params.valid()) {
        throw ConfigError("synthetic truth: invalid model parameters");
    }
    if (days < 1) {
        throw ConfigError("synthetic truth: days must be >= 1");
    }
    obs.validate();
    int last = -1;
    for (const auto& cp : change_points) {
        if (cp.day <= last || cp.day < 0) {
            throw ConfigError("synthetic truth: change points must have increasing non-negative days");
        }
        if (!(cp.beta > 0.0)) {
            throw ConfigError("synthetic truth: change-point beta must be positive");
        }
        last = cp.day;
    }
    if (!try_assemble_initial_state(ic, params)) {
        throw InfeasibleParameters("synthetic truth: initial conditions exceed omega * N");
    }
}

double SyntheticTruth::beta_on(int day) const
{
    double beta = params.beta;
    for (const auto& cp : change_points) {
        if (cp.day <= day) {
            beta = cp.beta;
        }
    }
    return beta;
}

SyntheticData simulate_synthetic(const SyntheticTruth& truth, double step)
{
    truth.validate();
    // One parameter set per day keeps the callback a cheap lookup.
    std::vector<EpiParams<double>> schedule(static_cast<std::size_t>(truth.days), truth.params);
    for (int d = 0; d < truth.days; ++d) {
        schedule[static_cast<std::size_t>(d)].beta = truth.beta_on(d);
    }
    const auto x0 = assemble_initial_state(truth.ic, truth.params);
    const auto traj = integrate(
        x0, [&](int day) -> const EpiParams<double>& { return schedule[static_cast<std::size_t>(day)]; }, 0,
        truth.days, step);

    SyntheticData out;
    // The case flux does not depend on beta, so any scheduled parameter set works.
    out.mu_cases = expected_cases(traj, truth.params);
    out.mu_deaths = expected_deaths(traj);
    out.series.start_date = truth.start_date;

    std::mt19937_64 rng(truth.seed);
    for (int d = 0; d < truth.days; ++d) {
        const double mc = out.mu_cases(d);
        const double md = out.mu_deaths(d);
        if (truth.noise) {
            out.series.cases.push_back(nb_sample(mc, truth.obs, rng));
            out.series.deaths.push_back(nb_sample(md, truth.obs, rng));
        }
        else {
            out.series.cases.push_back(std::llround(std::max(0.0, truth.obs.p_report * mc)));
            out.series.deaths.push_back(std::llround(std::max(0.0, truth.obs.p_report * md)));
        }
    }
    return out;
}

nlohmann::ordered_json truth_to_json(const SyntheticTruth& truth)
{
    const auto& p = truth.params;
    nlohmann::ordered_json j;
    j["params"] = {{"beta", p.beta},     {"omega", p.omega},   {"g", p.g},         {"f", p.f},
                   {"k_obs", p.k_obs},   {"sigma1", p.sigma1}, {"sigma2", p.sigma2}, {"gamma", p.gamma},
                   {"N", p.N}};
    j["initial_conditions"] = {
        {"E0", truth.ic.E0}, {"O0", truth.ic.O0}, {"U0", truth.ic.U0}, {"R0", truth.ic.R0}, {"D0", truth.ic.D0}};
    j["change_points"] = nlohmann::ordered_json::array();
    for (const auto& cp : truth.change_points) {
        j["change_points"].push_back({{"day", cp.day}, {"beta", cp.beta}});
    }
    j["observation"] = {
        {"p_report", truth.obs.p_report}, {"theta_over", truth.obs.theta_over}, {"omega_over", truth.obs.omega_over}};
    j["days"] = truth.days;
    j["start_date"] = format_date(truth.start_date);
    j["seed"] = truth.seed;
    j["noise"] = truth.noise;
    return j;
}

SyntheticTruth truth_from_json(const nlohmann::json& j)
{
    try {
        SyntheticTruth t;
        const auto& p = j.at("params");
        t.params.beta = p.at("beta");
        t.params.omega = p.at("omega");
        t.params.g = p.at("g");
        t.params.f = p.at("f");
        t.params.k_obs = p.at("k_obs");
        t.params.sigma1 = p.at("sigma1");
        t.params.sigma2 = p.at("sigma2");
        t.params.gamma = p.at("gamma");
        t.params.N = p.at("N");
        const auto& ic = j.at("initial_conditions");
        t.ic = {ic.at("E0"), ic.at("O0"), ic.at("U0"), ic.at("R0"), ic.at("D0")};
        for (const auto& cp : j.at("change_points")) {
            t.change_points.push_back({cp.at("day"), cp.at("beta")});
        }
        const auto& o = j.at("observation");
        t.obs = {o.at("p_report"), o.at("theta_over"), o.at("omega_over")};
        t.days = j.at("days");
        const auto date = parse_date(j.at("start_date").get<std::string>());
        if (!date) {
            throw ConfigError("truth record: bad start_date");
        }
        t.start_date = *date;
        t.seed = j.at("seed");
        t.noise = j.at("noise");
        return t;
    }
    catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("truth record: ") + e.what());
    }
}

void save_truth(const std::filesystem::path& path, const SyntheticTruth& truth)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ConfigError("cannot write " + path.string());
    }
    out << truth_to_json(truth).dump(2) << '\n';
}

SyntheticTruth load_truth(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open truth file " + path.string());
    }
    try {
        return truth_from_json(nlohmann::json::parse(in));
    }
    catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("truth record: ") + e.what());
    }
}

} // namespace epiassim
