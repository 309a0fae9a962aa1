#pragma once

#include <Eigen/Core>

#include <array>
#include <random>
#include <span>
#include <string>
#include <variant>

#include "epiassim/epimodel.hpp"

namespace epiassim {

using Rng = std::mt19937_64;

struct GammaDist {
    double shape;
    double scale;
};

struct BetaDist {
    double a;
    double b;
};

/// Parameters on the log scale: log X ~ Normal(mu, sigma^2).
struct LogNormalDist {
    double mu;
    double sigma;
};

enum class Family { Gamma, Beta, LogNormal };

std::string family_name(Family f);

class Distribution1D {
public:
    Distribution1D(GammaDist d);
    Distribution1D(BetaDist d);
    Distribution1D(LogNormalDist d);

    static Distribution1D gamma(double shape, double scale) { return GammaDist{shape, scale}; }
    static Distribution1D beta(double a, double b) { return BetaDist{a, b}; }
    static Distribution1D lognormal(double mu, double sigma) { return LogNormalDist{mu, sigma}; }

    Family family() const;
    /// Family parameters in declaration order, e.g. (shape, scale) for Gamma.
    std::array<double, 2> params() const;

    double mean() const;
    double variance() const;

    template <typename Visitor>
    decltype(auto) visit(Visitor&& v) const { return std::visit(std::forward<Visitor>(v), dist_); }

private:
    std::variant<GammaDist, BetaDist, LogNormalDist> dist_;
};

double log_density(const Distribution1D& d, double x);
double sample(const Distribution1D& d, Rng& rng);

/// Method-of-moments fit. Gamma and Beta match the sample mean and variance;
/// LogNormal matches the mean and sd of log-samples. Throws FitDegenerate on
/// (near) constant samples or samples outside the family's support.
Distribution1D fit_moments(std::span<const double> samples, Family family);

/// Solves for the family parameters with the given mean and variance. Beta
/// parameters that would fall below kBetaParamFloor are clamped to it.
Distribution1D moment_match(Family family, double mean, double variance);

inline constexpr double kBetaParamFloor = 0.01;
inline constexpr std::size_t kMinFitSamples = 100;

/// Coordinates of the jointly inferred vector, in fixed order.
enum class Coord : Eigen::Index { E0 = 0, O0, U0, R0, D0, Beta, Omega, G, Count };

inline constexpr Eigen::Index kNumCoords = static_cast<Eigen::Index>(Coord::Count);

constexpr Eigen::Index idx(Coord c) { return static_cast<Eigen::Index>(c); }

const char* coord_name(Coord c);

using InferenceVector = Eigen::Matrix<double, kNumCoords, 1>;

InitialConditions<double> initial_conditions(const InferenceVector& v);

/// Copies the fixed constants of `base` and overrides beta, omega and g.
EpiParams<double> with_inferred(const EpiParams<double>& base, const InferenceVector& v);

/// Independent per-coordinate prior over the inference vector.
struct PriorSpec {
    std::array<Distribution1D, kNumCoords> coords;

    const Distribution1D& operator[](Coord c) const { return coords[static_cast<std::size_t>(c)]; }
};

/// Gamma(10, 1) for E0, O0, U0; Gamma(1, 1) for R0, D0; LogNormal(1, 1)
/// for beta; Beta(1 + 1/6, 1 + 1/3) for omega and g.
PriorSpec default_prior();

/// Sum of coordinate log-densities; -inf if any coordinate is outside its
/// support or the implied S(0) under `fixed` is negative.
double prior_log_density(const PriorSpec& ps, const InferenceVector& v, const EpiParams<double>& fixed);

InferenceVector sample_prior(const PriorSpec& ps, Rng& rng);

} // namespace epiassim
