#pragma once

#include <string>

#include "epiassim/assimilation.hpp"
#include "epiassim/cli/score.hpp"
#include "epiassim/observation.hpp"

namespace epiassim {

/// Static plot of one window and observable: observed counts as points,
/// the 5-95% band (light), the interquartile band (darker) and the median
/// forecast as a red line.
std::string forecast_svg(const EpidemicSeries& series, const ForecastResult& fc, const WindowConfig& cfg,
                         Observable observable, const std::string& title);

} // namespace epiassim
