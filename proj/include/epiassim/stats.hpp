#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace epiassim {

/// Linear-interpolation quantile (R type 7) of already sorted values.
inline double quantile_sorted(std::span<const double> sorted, double prob)
{
    if (sorted.empty()) {
        throw std::invalid_argument("quantile_sorted: empty input");
    }
    const double pos = prob * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

inline double quantile(std::vector<double> values, double prob)
{
    std::sort(values.begin(), values.end());
    return quantile_sorted(values, prob);
}

struct SampleMoments {
    double mean = 0.0;
    double variance = 0.0;
};

/// Mean and unbiased variance.
inline SampleMoments sample_moments(std::span<const double> values)
{
    if (values.size() < 2) {
        throw std::invalid_argument("sample_moments: need at least two values");
    }
    double mean = 0.0;
    for (double v : values) {
        mean += v;
    }
    mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) {
        ss += (v - mean) * (v - mean);
    }
    return {mean, ss / static_cast<double>(values.size() - 1)};
}

} // namespace epiassim
