#include "epiassim/priors.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "epiassim/errors.hpp"

namespace epiassim {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_positive(double v, const char* what)
{
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument(std::string("Distribution1D: ") + what + " must be positive and finite");
    }
}

} // namespace

std::string family_name(Family f)
{
    switch (f) {
    case Family::Gamma: return "gamma";
    case Family::Beta: return "beta";
    case Family::LogNormal: return "lognormal";
    }
    return "?";
}

Distribution1D::Distribution1D(GammaDist d) : dist_(d)
{
    require_positive(d.shape, "gamma shape");
    require_positive(d.scale, "gamma scale");
}

Distribution1D::Distribution1D(BetaDist d) : dist_(d)
{
    require_positive(d.a, "beta a");
    require_positive(d.b, "beta b");
}

Distribution1D::Distribution1D(LogNormalDist d) : dist_(d)
{
    if (!std::isfinite(d.mu)) {
        throw std::invalid_argument("Distribution1D: lognormal mu must be finite");
    }
    require_positive(d.sigma, "lognormal sigma");
}

Family Distribution1D::family() const
{
    return visit(overloaded{[](const GammaDist&) { return Family::Gamma; },
                            [](const BetaDist&) { return Family::Beta; },
                            [](const LogNormalDist&) { return Family::LogNormal; }});
}

std::array<double, 2> Distribution1D::params() const
{
    return visit(overloaded{[](const GammaDist& d) { return std::array{d.shape, d.scale}; },
                            [](const BetaDist& d) { return std::array{d.a, d.b}; },
                            [](const LogNormalDist& d) { return std::array{d.mu, d.sigma}; }});
}

double Distribution1D::mean() const
{
    return visit(overloaded{[](const GammaDist& d) { return d.shape * d.scale; },
                            [](const BetaDist& d) { return d.a / (d.a + d.b); },
                            [](const LogNormalDist& d) { return std::exp(d.mu + 0.5 * d.sigma * d.sigma); }});
}

double Distribution1D::variance() const
{
    return visit(overloaded{[](const GammaDist& d) { return d.shape * d.scale * d.scale; },
                            [](const BetaDist& d) {
                                const double s = d.a + d.b;
                                return d.a * d.b / (s * s * (s + 1.0));
                            },
                            [](const LogNormalDist& d) {
                                const double s2 = d.sigma * d.sigma;
                                return std::expm1(s2) * std::exp(2.0 * d.mu + s2);
                            }});
}

double log_density(const Distribution1D& d, double x)
{
    if (std::isnan(x)) {
        return kNegInf;
    }
    return d.visit(overloaded{
        [x](const GammaDist& g) {
            if (!(x > 0.0) || std::isinf(x)) {
                return kNegInf;
            }
            return (g.shape - 1.0) * std::log(x) - x / g.scale - std::lgamma(g.shape) -
                   g.shape * std::log(g.scale);
        },
        [x](const BetaDist& b) {
            if (!(x > 0.0 && x < 1.0)) {
                return kNegInf;
            }
            const double log_beta_fn = std::lgamma(b.a) + std::lgamma(b.b) - std::lgamma(b.a + b.b);
            return (b.a - 1.0) * std::log(x) + (b.b - 1.0) * std::log1p(-x) - log_beta_fn;
        },
        [x](const LogNormalDist& ln) {
            if (!(x > 0.0) || std::isinf(x)) {
                return kNegInf;
            }
            const double lx = std::log(x);
            const double z = (lx - ln.mu) / ln.sigma;
            return -0.5 * z * z - lx - std::log(ln.sigma) - 0.5 * std::log(2.0 * std::numbers::pi);
        }});
}

double sample(const Distribution1D& d, Rng& rng)
{
    return d.visit(overloaded{[&rng](const GammaDist& g) {
                                  std::gamma_distribution<double> dist(g.shape, g.scale);
                                  return dist(rng);
                              },
                              [&rng](const BetaDist& b) {
                                  std::gamma_distribution<double> ga(b.a, 1.0);
                                  std::gamma_distribution<double> gb(b.b, 1.0);
                                  const double x = ga(rng);
                                  const double y = gb(rng);
                                  return x / (x + y);
                              },
                              [&rng](const LogNormalDist& ln) {
                                  std::normal_distribution<double> dist(ln.mu, ln.sigma);
                                  return std::exp(dist(rng));
                              }});
}

Distribution1D moment_match(Family family, double mean, double variance)
{
    if (!std::isfinite(mean) || !std::isfinite(variance) || !(variance > 0.0)) {
        throw FitDegenerate("moment_match: mean and variance must be finite with positive variance");
    }
    switch (family) {
    case Family::Gamma:
        if (!(mean > 0.0)) {
            throw FitDegenerate("moment_match: gamma mean must be positive");
        }
        return GammaDist{mean * mean / variance, variance / mean};
    case Family::LogNormal: {
        if (!(mean > 0.0)) {
            throw FitDegenerate("moment_match: lognormal mean must be positive");
        }
        const double s2 = std::log1p(variance / (mean * mean));
        return LogNormalDist{std::log(mean) - 0.5 * s2, std::sqrt(s2)};
    }
    case Family::Beta: {
        if (!(mean > 0.0 && mean < 1.0)) {
            throw FitDegenerate("moment_match: beta mean must lie in (0, 1)");
        }
        const double common = mean * (1.0 - mean) / variance - 1.0;
        const double a = std::max(mean * common, kBetaParamFloor);
        const double b = std::max((1.0 - mean) * common, kBetaParamFloor);
        return BetaDist{a, b};
    }
    }
    throw std::invalid_argument("moment_match: unknown family");
}

Distribution1D fit_moments(std::span<const double> samples, Family family)
{
    if (samples.size() < kMinFitSamples) {
        throw FitDegenerate("fit_moments: need at least " + std::to_string(kMinFitSamples) + " samples");
    }
    const bool log_scale = family == Family::LogNormal;
    double mean = 0.0;
    for (double s : samples) {
        const bool in_support = family == Family::Beta ? (s > 0.0 && s < 1.0) : s > 0.0;
        if (!in_support || !std::isfinite(s)) {
            throw FitDegenerate("fit_moments: sample outside the " + family_name(family) + " support");
        }
        mean += log_scale ? std::log(s) : s;
    }
    const auto n = static_cast<double>(samples.size());
    mean /= n;
    double var = 0.0;
    for (double s : samples) {
        const double dev = (log_scale ? std::log(s) : s) - mean;
        var += dev * dev;
    }
    var /= n - 1.0;

    if (log_scale) {
        if (!(var > 1e-12)) {
            throw FitDegenerate("fit_moments: log-samples are constant");
        }
        return LogNormalDist{mean, std::sqrt(var)};
    }
    if (!(var > 1e-12 * mean * mean)) {
        throw FitDegenerate("fit_moments: samples are (numerically) constant");
    }
    return moment_match(family, mean, var);
}

const char* coord_name(Coord c)
{
    switch (c) {
    case Coord::E0: return "E0";
    case Coord::O0: return "O0";
    case Coord::U0: return "U0";
    case Coord::R0: return "R0";
    case Coord::D0: return "D0";
    case Coord::Beta: return "beta";
    case Coord::Omega: return "omega";
    case Coord::G: return "g";
    default: return "?";
    }
}

InitialConditions<double> initial_conditions(const InferenceVector& v)
{
    return {v(idx(Coord::E0)), v(idx(Coord::O0)), v(idx(Coord::U0)), v(idx(Coord::R0)), v(idx(Coord::D0))};
}

EpiParams<double> with_inferred(const EpiParams<double>& base, const InferenceVector& v)
{
    EpiParams<double> p = base;
    p.beta = v(idx(Coord::Beta));
    p.omega = v(idx(Coord::Omega));
    p.g = v(idx(Coord::G));
    return p;
}

PriorSpec default_prior()
{
    const auto ic_low = Distribution1D::gamma(10.0, 1.0);
    const auto ic_zero = Distribution1D::gamma(1.0, 1.0);
    const auto fraction = Distribution1D::beta(1.0 + 1.0 / 6.0, 1.0 + 1.0 / 3.0);
    return PriorSpec{{ic_low, ic_low, ic_low, ic_zero, ic_zero, Distribution1D::lognormal(1.0, 1.0), fraction,
                      fraction}};
}

double prior_log_density(const PriorSpec& ps, const InferenceVector& v, const EpiParams<double>& fixed)
{
    double lp = 0.0;
    for (Eigen::Index i = 0; i < kNumCoords; ++i) {
        lp += log_density(ps.coords[static_cast<std::size_t>(i)], v(i));
        if (lp == kNegInf) {
            return kNegInf;
        }
    }
    if (!try_assemble_initial_state(initial_conditions(v), with_inferred(fixed, v))) {
        return kNegInf;
    }
    return lp;
}

InferenceVector sample_prior(const PriorSpec& ps, Rng& rng)
{
    InferenceVector v;
    for (Eigen::Index i = 0; i < kNumCoords; ++i) {
        v(i) = sample(ps.coords[static_cast<std::size_t>(i)], rng);
    }
    return v;
}

} // namespace epiassim
