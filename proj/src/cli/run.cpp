#include "epiassim/cli/run.hpp"

#include <cmath>
#include <fstream>
#include <ostream>

#include "epiassim/cli/score.hpp"
#include "epiassim/cli/series_io.hpp"
#include "epiassim/cli/svg.hpp"
#include "epiassim/errors.hpp"

namespace epiassim {

namespace {

using ojson = nlohmann::ordered_json;

// NaN and infinities have no JSON form; they become null.
ojson finite_or_null(double v)
{
    return std::isfinite(v) ? ojson(v) : ojson(nullptr);
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ConfigError("cannot write " + path.string());
    }
    out << text;
}

std::string posterior_csv(const PosteriorSamples& post)
{
    std::string s;
    for (Eigen::Index j = 0; j < kNumCoords; ++j) {
        s += (j ? "," : "");
        s += coord_name(static_cast<Coord>(j));
    }
    s += '\n';
    for (Eigen::Index i = 0; i < post.draws.rows(); ++i) {
        for (Eigen::Index j = 0; j < kNumCoords; ++j) {
            s += (j ? "," : "");
            s += format_number(post.draws(i, j));
        }
        s += '\n';
    }
    return s;
}

} // namespace

void RunConfig::validate() const
{
    if (data.empty() || !std::filesystem::is_regular_file(data)) {
        throw ConfigError("data file not found: " + data.string());
    }
    if (out_dir.empty()) {
        throw ConfigError("output directory is required");
    }
    if (std::filesystem::exists(out_dir) && !std::filesystem::is_directory(out_dir)) {
        throw ConfigError("output path is not a directory: " + out_dir.string());
    }
    try {
        window.validate();
        assimilation.validate();
    }
    catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

ojson config_to_json(const RunConfig& cfg)
{
    const auto& a = cfg.assimilation;
    const auto& p = a.fixed;
    const auto& w = cfg.window;
    ojson j;
    j["data"] = cfg.data.filename().string();
    j["locality"] = cfg.locality;
    j["population"] = p.N;
    j["window"] = {{"t0", w.t0},       {"learning", w.learning}, {"delay", w.delay},
                   {"horizon", w.horizon}, {"advance", w.advance},
                   {"max_windows", w.max_windows ? ojson(*w.max_windows) : ojson(nullptr)}};
    j["observation"] = {
        {"p_report", a.obs.p_report}, {"theta_over", a.obs.theta_over}, {"omega_over", a.obs.omega_over}};
    j["model"] = {{"f", p.f},           {"k_obs", p.k_obs}, {"sigma1", p.sigma1},
                  {"sigma2", p.sigma2}, {"gamma", p.gamma}, {"step", a.step}};
    j["sampler"] = {{"iters", a.sampler.iters}, {"burn_in", a.sampler.burn_in}, {"thin", a.sampler.thin}};
    j["seed"] = a.seed;
    j["inflation"] = a.inflation;
    j["predictive_noise"] = a.predictive_noise;
    return j;
}

ojson error_json(const std::string& kind, const std::string& message, std::optional<int> window)
{
    ojson e;
    e["error"] = kind;
    e["message"] = message;
    e["window"] = window ? ojson(*window) : ojson(nullptr);
    return e;
}

ojson summary_json(const RunConfig& cfg, const EpidemicSeries& series, const SequentialResult& result)
{
    ojson j;
    j["status"] = result.ok() ? "ok" : "failed";
    j["config"] = config_to_json(cfg);
    j["series"] = {{"start_date", format_date(series.start_date)}, {"days", series.size()}};
    j["coordinates"] = ojson::array();
    for (Eigen::Index c = 0; c < kNumCoords; ++c) {
        j["coordinates"].push_back(coord_name(static_cast<Coord>(c)));
    }
    j["windows"] = ojson::array();
    for (const auto& w : result.windows) {
        const auto b = window_bounds(cfg.window, w.forecast.window);
        ojson wj;
        wj["window"] = w.forecast.window;
        wj["learning_start"] = format_date(series.date_at(static_cast<std::size_t>(b.learning.begin)));
        wj["learning_end"] = format_date(series.date_at(static_cast<std::size_t>(b.learning.end - 1)));
        wj["forecast_start"] = format_date(series.date_at(static_cast<std::size_t>(b.forecast.begin)));
        wj["forecast_end"] = format_date(series.date_at(static_cast<std::size_t>(b.forecast.end - 1)));
        wj["draws"] = w.posterior.draws.rows();
        wj["acceptance_rate"] = w.posterior.acceptance_rate;
        ojson params;
        ojson iat;
        for (Eigen::Index c = 0; c < kNumCoords; ++c) {
            const ParamSummary s = summarize(w.posterior.draws.col(c));
            const char* name = coord_name(static_cast<Coord>(c));
            params[name] = {{"median", s.median}, {"q05", s.q05}, {"q95", s.q95}};
            iat[name] = finite_or_null(w.posterior.iat(c));
        }
        wj["parameters"] = params;
        wj["iat"] = iat;
        wj["forecast_dropped_draws"] = w.forecast.dropped_draws;
        wj["prior_dropped_draws"] = w.propagation_dropped;
        j["windows"].push_back(wj);
    }
    j["failure"] = result.failure ? error_json(result.failure->kind, result.failure->message, result.failure->window)
                                  : ojson(nullptr);
    return j;
}

void write_window_artifacts(const RunConfig& cfg, const EpidemicSeries& series, const WindowResult& w)
{
    const std::string k = std::to_string(w.forecast.window);
    const auto rows = forecast_rows(w.forecast, series.start_date);
    {
        std::ofstream out(cfg.out_dir / ("forecast_" + k + ".csv"), std::ios::binary);
        if (!out) {
            throw ConfigError("cannot write into " + cfg.out_dir.string());
        }
        write_forecast_csv(out, rows);
    }
    write_text(cfg.out_dir / ("posterior_" + k + ".csv"), posterior_csv(w.posterior));
    for (Observable o : {Observable::Cases, Observable::Deaths}) {
        const std::string title = cfg.locality + ": " + observable_name(o) + ", window " + k + ", forecast from " +
                                  format_date(series.date_at(static_cast<std::size_t>(w.forecast.forecast_day)));
        write_text(cfg.out_dir / ("forecast_" + k + "_" + observable_name(o) + ".svg"),
                   forecast_svg(series, w.forecast, cfg.window, o, title));
    }
}

int run_pipeline(const RunConfig& cfg, std::ostream& log, std::ostream& err)
{
    try {
        cfg.validate();
        const EpidemicSeries series = load_series(cfg.data);
        std::filesystem::create_directories(cfg.out_dir);
        const int n = count_windows(cfg.window, series.size());
        if (n == 0) {
            throw ConfigError("series of " + std::to_string(series.size()) +
                              " days is shorter than one learning period");
        }
        log << "epiassim run: " << series.size() << " days, " << n << " window(s), seed " << cfg.assimilation.seed
            << '\n';

        const SequentialResult result = run_sequential(series, cfg.window, cfg.assimilation);
        for (const auto& w : result.windows) {
            write_window_artifacts(cfg, series, w);
            log << "window " << w.forecast.window << ": acceptance " << w.posterior.acceptance_rate
                << ", beta median " << w.forecast.theta[0].median << '\n';
        }
        write_text(cfg.out_dir / "summary.json", summary_json(cfg, series, result).dump(2) + "\n");
        if (!result.ok()) {
            err << error_json(result.failure->kind, result.failure->message, result.failure->window).dump() << '\n';
            return 1;
        }
        return 0;
    }
    catch (const Error& e) {
        err << error_json(e.kind(), e.what()).dump() << '\n';
        return 1;
    }
    catch (const std::exception& e) {
        err << error_json("internal-error", e.what()).dump() << '\n';
        return 1;
    }
}

} // namespace epiassim
