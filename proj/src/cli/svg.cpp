#include "epiassim/cli/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "epiassim/cli/series_io.hpp"

namespace epiassim {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

// A "nice" tick spacing giving roughly `target` intervals over [0, top].
double tick_step(double top, int target)
{
    const double raw = top / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        if (m * mag >= raw) {
            return m * mag;
        }
    }
    return 10.0 * mag;
}

} // namespace

std::string forecast_svg(const EpidemicSeries& series, const ForecastResult& fc, const WindowConfig& cfg,
                         Observable observable, const std::string& title)
{
    const WindowBounds b = window_bounds(cfg, fc.window);
    const QuantileTable& t = observable == Observable::Cases ? fc.cases : fc.deaths;
    const auto& counts = observable == Observable::Cases ? series.cases : series.deaths;
    const int day0 = b.start;
    const int day1 = b.forecast.end;

    double ymax = t.col(4).maxCoeff();
    for (int d = day0; d < std::min<int>(day1, static_cast<int>(counts.size())); ++d) {
        ymax = std::max(ymax, static_cast<double>(counts[static_cast<std::size_t>(d)]));
    }
    const double step = tick_step(std::max(ymax, 1.0), 5);
    ymax = step * std::ceil(std::max(ymax, 1.0) / step);

    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    auto sx = [&](double day) { return kLeft + plot_w * (day - day0) / (day1 - day0); };
    auto sy = [&](double v) { return kTop + plot_h * (1.0 - v / ymax); };
    // Day d is drawn at its midpoint.
    auto fx = [&](int row) { return sx(fc.forecast_day + row + 0.5); };

    auto band = [&](int lo, int hi) {
        std::string pts;
        for (int r = 0; r < t.rows(); ++r) {
            pts += num(fx(r)) + "," + num(sy(t(r, hi))) + " ";
        }
        for (int r = static_cast<int>(t.rows()) - 1; r >= 0; --r) {
            pts += num(fx(r)) + "," + num(sy(t(r, lo))) + " ";
        }
        pts.pop_back();
        return pts;
    };

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s << "<text x=\"" << num(kWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(title)
      << "</text>\n";

    for (double v = 0.0; v <= ymax + 1e-9; v += step) {
        s << "<line x1=\"" << num(kLeft) << "\" x2=\"" << num(kWidth - kRight) << "\" y1=\"" << num(sy(v))
          << "\" y2=\"" << num(sy(v)) << "\" stroke=\"#e6e6e6\"/>\n";
        s << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(sy(v) + 4) << "\" text-anchor=\"end\">"
          << format_number(v) << "</text>\n";
    }
    for (int d : {day0, b.delay.begin, b.forecast.begin, day1}) {
        s << "<line x1=\"" << num(sx(d)) << "\" x2=\"" << num(sx(d)) << "\" y1=\"" << num(kTop) << "\" y2=\""
          << num(kHeight - kBottom) << "\" stroke=\"#bbbbbb\" stroke-dasharray=\"4 3\"/>\n";
        s << "<text x=\"" << num(sx(d)) << "\" y=\"" << num(kHeight - kBottom + 18)
          << "\" text-anchor=\"middle\">" << format_date(series.date_at(static_cast<std::size_t>(d))) << "</text>\n";
    }

    s << "<polygon points=\"" << band(0, 4) << "\" fill=\"#f4a582\" fill-opacity=\"0.45\"/>\n";
    s << "<polygon points=\"" << band(1, 3) << "\" fill=\"#d6604d\" fill-opacity=\"0.55\"/>\n";
    std::string median;
    for (int r = 0; r < t.rows(); ++r) {
        median += num(fx(r)) + "," + num(sy(t(r, 2))) + " ";
    }
    median.pop_back();
    s << "<polyline points=\"" << median << "\" fill=\"none\" stroke=\"#d7191c\" stroke-width=\"2\"/>\n";

    for (int d = day0; d < std::min<int>(day1, static_cast<int>(counts.size())); ++d) {
        s << "<circle cx=\"" << num(sx(d + 0.5)) << "\" cy=\"" << num(sy(static_cast<double>(
                                                                       counts[static_cast<std::size_t>(d)])))
          << "\" r=\"2.5\" fill=\"" << (d < b.learning.end ? "#222222" : "#777777") << "\"/>\n";
    }
    s << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(plot_w) << "\" height=\""
      << num(plot_h) << "\" fill=\"none\" stroke=\"#444444\"/>\n";
    s << "</svg>\n";
    return s.str();
}

} // namespace epiassim
