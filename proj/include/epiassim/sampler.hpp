#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <span>

namespace epiassim {

/// Unnormalized log target; -inf marks points outside the support.
using LogDensity = std::function<double(const Eigen::VectorXd&)>;

enum class TwalkKernel { Walk = 0, Traverse, Blow, Hop };

struct TwalkOptions {
    double walk_aperture = 1.5;    // a_w
    double traverse_scale = 6.0;   // a_t
    /// Selection probabilities of walk, traverse, blow, hop.
    std::array<double, 4> kernel_probs{0.4918, 0.4918, 0.0082, 0.0082};
    /// Expected number of coordinates perturbed per move (capped at the dimension).
    double expected_moved = 4.0;
};

struct SamplerConfig {
    std::int64_t iters = 150000;
    std::int64_t burn_in = 50000;
    std::int64_t thin = 100;
    std::int64_t min_draws = 100;
    TwalkOptions twalk{};

    std::int64_t retained() const { return iters > burn_in ? (iters - burn_in + thin - 1) / thin : 0; }
    void validate() const;
};

struct PosteriorSamples {
    /// One retained draw per row.
    Eigen::MatrixXd draws;
    Eigen::VectorXd log_posts;
    double acceptance_rate = 0.0;
    /// Integrated autocorrelation time of each coordinate of the retained
    /// draws; NaN when fewer than kMinIatLength draws were kept.
    Eigen::VectorXd iat;
    std::array<double, 4> kernel_acceptance{};
};

/// The two-point t-walk. Each step updates one of the pair (x, x') with one
/// of four scale-free kernels and a Metropolis-Hastings correction, leaving
/// pi(x) pi(x') invariant.
class TWalk {
public:
    TWalk(LogDensity target, Eigen::VectorXd x, Eigen::VectorXd xp, TwalkOptions opts = {});

    /// One iteration with a randomly selected kernel; returns true on acceptance.
    bool step(std::mt19937_64& rng);
    bool step(std::mt19937_64& rng, TwalkKernel kernel);

    const Eigen::VectorXd& x() const { return x_; }
    const Eigen::VectorXd& xp() const { return xp_; }
    double log_x() const { return log_x_; }
    double log_xp() const { return log_xp_; }
    Eigen::Index dim() const { return x_.size(); }

    /// Replaces the pair; both points must have finite target value.
    void reset(Eigen::VectorXd x, Eigen::VectorXd xp);

private:
    Eigen::Array<bool, Eigen::Dynamic, 1> draw_subset(std::mt19937_64& rng) const;

    LogDensity target_;
    Eigen::VectorXd x_;
    Eigen::VectorXd xp_;
    double log_x_;
    double log_xp_;
    TwalkOptions opts_;
    double subset_prob_;
};

/// Runs the t-walk from (init_a, init_b) and keeps the x-chain after burn-in,
/// every `thin`-th iteration. Throws InitializationFailed if either start
/// point has non-finite target value.
PosteriorSamples run_mcmc(const LogDensity& target, const Eigen::VectorXd& init_a, const Eigen::VectorXd& init_b,
                          const SamplerConfig& cfg, std::mt19937_64& rng);

inline constexpr std::size_t kMinIatLength = 1000;

/// Initial-positive-sequence estimate of the integrated autocorrelation time,
/// at least 1. Returns +inf for a chain with zero variance (no information).
double estimate_iat(std::span<const double> chain);

} // namespace epiassim
