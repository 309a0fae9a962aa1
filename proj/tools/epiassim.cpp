#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "epiassim/cli/run.hpp"
#include "epiassim/cli/score.hpp"
#include "epiassim/cli/series_io.hpp"
#include "epiassim/cli/simulate.hpp"
#include "epiassim/errors.hpp"

namespace {

using namespace epiassim;

void add_model_options(CLI::App& app, EpiParams<double>& p)
{
    app.add_option("--population,-N", p.N, "Total population N")->required()->check(CLI::PositiveNumber);
    app.add_option("--f", p.f, "Fraction of infections that are observed")->capture_default_str();
    app.add_option("--k-obs", p.k_obs, "Relative infectiousness of observed cases")->capture_default_str();
    app.add_option("--sigma1", p.sigma1, "Exit rate of the exposed stage (1/day)")->capture_default_str();
    app.add_option("--sigma2", p.sigma2, "Exit rate of the observed infectious stage (1/day)")
        ->capture_default_str();
    app.add_option("--gamma", p.gamma, "Recovery rate of unobserved infectious (1/day)")->capture_default_str();
}

void add_obs_options(CLI::App& app, ObsConfig& obs)
{
    app.add_option("--p-report", obs.p_report, "Reporting probability")->capture_default_str();
    app.add_option("--theta", obs.theta_over, "Quadratic overdispersion of the counts")->capture_default_str();
    app.add_option("--omega-over", obs.omega_over, "Linear overdispersion of the counts (>= 1)")
        ->capture_default_str();
}

ChangePoint parse_change_point(const std::string& text)
{
    const auto colon = text.find(':');
    if (colon == std::string::npos) {
        throw ConfigError("change point '" + text + "' must look like DAY:BETA");
    }
    try {
        return {std::stoi(text.substr(0, colon)), std::stod(text.substr(colon + 1))};
    }
    catch (const std::exception&) {
        throw ConfigError("change point '" + text + "' must look like DAY:BETA");
    }
}

std::filesystem::path default_truth_path(std::filesystem::path series)
{
    return series.replace_extension(".truth.json");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Sequential Bayesian data assimilation for epidemic forecasting"};
    app.require_subcommand(1);

    // run
    RunConfig rc;
    int max_windows = 0;
    bool no_noise = false;
    auto* run = app.add_subcommand("run", "Fit sliding windows to a series and write forecasts");
    run->add_option("--data", rc.data, "Input CSV with header date,cases,deaths")->required();
    run->add_option("--out", rc.out_dir, "Output directory")->required();
    run->add_option("--locality", rc.locality, "Name used in plot titles")->capture_default_str();
    add_model_options(*run, rc.assimilation.fixed);
    add_obs_options(*run, rc.assimilation.obs);
    run->add_option("--t0", rc.window.t0, "First day of the analysis (index into the series)")
        ->capture_default_str();
    run->add_option("--learning", rc.window.learning, "Learning period L in days")->capture_default_str();
    run->add_option("--delay", rc.window.delay, "Delay period in days")->capture_default_str();
    run->add_option("--horizon", rc.window.horizon, "Forecast horizon F in days")->capture_default_str();
    run->add_option("--advance", rc.window.advance, "Window advance n in days")->capture_default_str();
    run->add_option("--windows", max_windows, "Stop after this many windows (0 = as many as fit)");
    run->add_option("--iters", rc.assimilation.sampler.iters, "MCMC iterations per window")->capture_default_str();
    run->add_option("--burn-in", rc.assimilation.sampler.burn_in, "Burn-in iterations")->capture_default_str();
    run->add_option("--thin", rc.assimilation.sampler.thin, "Keep every thin-th iteration")->capture_default_str();
    run->add_option("--seed", rc.assimilation.seed, "Random seed")->capture_default_str();
    run->add_option("--inflation", rc.assimilation.inflation, "Variance inflation kappa of the parameter prior")
        ->capture_default_str();
    run->add_option("--step", rc.assimilation.step, "Largest RK4 step in days")->capture_default_str();
    run->add_flag("--no-noise", no_noise, "Forecast bands of expected counts instead of predictive draws");

    // simulate
    SyntheticTruth truth;
    std::filesystem::path sim_out;
    std::filesystem::path sim_truth;
    std::vector<std::string> change_points;
    std::string start_date = "2020-03-01";
    bool sim_no_noise = false;
    auto* sim = app.add_subcommand("simulate", "Generate a synthetic series from known parameters");
    sim->add_option("--out", sim_out, "Output CSV path")->required();
    sim->add_option("--truth", sim_truth, "Truth record path (default: <out>.truth.json)");
    sim->add_option("--seed", truth.seed, "Random seed")->required();
    sim->add_option("--days", truth.days, "Number of days")->capture_default_str();
    sim->add_option("--start-date", start_date, "Date of the first day")->capture_default_str();
    add_model_options(*sim, truth.params);
    add_obs_options(*sim, truth.obs);
    sim->add_option("--beta", truth.params.beta, "Contact rate")->capture_default_str();
    sim->add_option("--omega", truth.params.omega, "Effective population fraction")->capture_default_str();
    sim->add_option("--g", truth.params.g, "Fatality fraction of observed cases")->capture_default_str();
    sim->add_option("--E0", truth.ic.E0, "Initial exposed")->capture_default_str();
    sim->add_option("--O0", truth.ic.O0, "Initial observed infectious")->capture_default_str();
    sim->add_option("--U0", truth.ic.U0, "Initial unobserved infectious")->capture_default_str();
    sim->add_option("--R0", truth.ic.R0, "Initial recovered")->capture_default_str();
    sim->add_option("--D0", truth.ic.D0, "Initial cumulative deaths")->capture_default_str();
    sim->add_option("--change-point", change_points, "Contact-rate change DAY:BETA (repeatable)");
    sim->add_flag("--no-noise", sim_no_noise, "Emit rounded expected counts");

    // score
    std::filesystem::path score_dir;
    std::filesystem::path score_data;
    std::filesystem::path score_out;
    auto* score = app.add_subcommand("score", "Score forecast bands against observed data");
    score->add_option("--forecasts", score_dir, "Run output directory holding forecast_<k>.csv")->required();
    score->add_option("--data", score_data, "Observed series CSV")->required();
    score->add_option("--out", score_out, "Also write the report to this file");

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) {
        if (max_windows > 0) {
            rc.window.max_windows = max_windows;
        }
        rc.assimilation.predictive_noise = !no_noise;
        return run_pipeline(rc, std::cout, std::cerr);
    }

    try {
        if (sim->parsed()) {
            for (const auto& cp : change_points) {
                truth.change_points.push_back(parse_change_point(cp));
            }
            const auto date = parse_date(start_date);
            if (!date) {
                throw ConfigError("bad --start-date '" + start_date + "'");
            }
            truth.start_date = *date;
            truth.noise = !sim_no_noise;
            const auto data = simulate_synthetic(truth);
            save_series(sim_out, data.series);
            const auto truth_path = sim_truth.empty() ? default_truth_path(sim_out) : sim_truth;
            save_truth(truth_path, truth);
            std::cout << "wrote " << sim_out.string() << " and " << truth_path.string() << '\n';
            return 0;
        }
        if (score->parsed()) {
            const auto observed = load_series(score_data);
            std::vector<std::pair<std::string, std::vector<ForecastRow>>> forecasts;
            for (const auto& path : find_forecast_files(score_dir)) {
                forecasts.emplace_back(path.filename().string(), load_forecast_csv(path));
            }
            if (forecasts.empty()) {
                throw ScoringError("no forecast_<k>.csv files in " + score_dir.string());
            }
            const std::string report = report_to_json(score_forecasts(forecasts, observed)).dump(2);
            std::cout << report << '\n';
            if (!score_out.empty()) {
                std::ofstream out(score_out, std::ios::binary);
                if (!out) {
                    throw ConfigError("cannot write " + score_out.string());
                }
                out << report << '\n';
            }
            return 0;
        }
    }
    catch (const Error& e) {
        std::cerr << error_json(e.kind(), e.what()).dump() << '\n';
        return 1;
    }
    catch (const std::exception& e) {
        std::cerr << error_json("internal-error", e.what()).dump() << '\n';
        return 1;
    }
    return 0;
}
