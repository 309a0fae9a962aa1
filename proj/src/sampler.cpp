#include "epiassim/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "epiassim/errors.hpp"

namespace epiassim {

namespace {

using Mask = Eigen::Array<bool, Eigen::Dynamic, 1>;

double uniform01(std::mt19937_64& rng)
{
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

// Traverse scaling factor with density proportional to beta^(a_t - 1) on
// (0, 1) and beta^(-(a_t + 1)) on (1, inf).
double draw_traverse_factor(double at, std::mt19937_64& rng)
{
    if (uniform01(rng) < (at - 1.0) / (2.0 * at)) {
        return std::pow(uniform01(rng), 1.0 / (at + 1.0));
    }
    return std::pow(uniform01(rng), 1.0 / (1.0 - at));
}

// Largest |a_i - b_i| over the masked coordinates.
double masked_max_gap(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Mask& phi)
{
    return (phi.cast<double>() * (a - b).array().abs()).maxCoeff();
}

// -log of an isotropic normal density over the masked coordinates.
double masked_normal_nll(const Eigen::VectorXd& point, const Eigen::VectorXd& centre, double sigma,
                         const Mask& phi)
{
    const double nphi = static_cast<double>(phi.count());
    const double sq = (phi.cast<double>() * (point - centre).array().square()).sum();
    return 0.5 * nphi * std::log(2.0 * std::numbers::pi) + nphi * std::log(sigma) + 0.5 * sq / (sigma * sigma);
}

} // namespace

void SamplerConfig::validate() const
{
    if (iters <= 0 || burn_in < 0 || iters <= burn_in) {
        throw std::invalid_argument("SamplerConfig: need iters > burn_in >= 0");
    }
    if (thin < 1) {
        throw std::invalid_argument("SamplerConfig: thin must be at least 1");
    }
    if (retained() < min_draws) {
        throw std::invalid_argument("SamplerConfig: (iters - burn_in) / thin = " + std::to_string(retained()) +
                                    " is below min_draws = " + std::to_string(min_draws));
    }
    double total = 0.0;
    for (double p : twalk.kernel_probs) {
        if (p < 0.0) {
            throw std::invalid_argument("SamplerConfig: negative kernel probability");
        }
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw std::invalid_argument("SamplerConfig: kernel probabilities must sum to 1");
    }
}

TWalk::TWalk(LogDensity target, Eigen::VectorXd x, Eigen::VectorXd xp, TwalkOptions opts)
    : target_(std::move(target)), log_x_(0.0), log_xp_(0.0), opts_(opts)
{
    reset(std::move(x), std::move(xp));
    const double n = static_cast<double>(x_.size());
    subset_prob_ = std::min(n, opts_.expected_moved) / n;
}

void TWalk::reset(Eigen::VectorXd x, Eigen::VectorXd xp)
{
    if (x.size() != xp.size() || x.size() == 0) {
        throw std::invalid_argument("TWalk: start points must have equal, non-zero dimension");
    }
    if (((x - xp).array() == 0.0).any()) {
        throw std::invalid_argument("TWalk: start points must differ in every coordinate");
    }
    const double lx = target_(x);
    const double lxp = target_(xp);
    if (!std::isfinite(lx) || !std::isfinite(lxp)) {
        throw InitializationFailed("t-walk start point has non-finite log target");
    }
    x_ = std::move(x);
    xp_ = std::move(xp);
    log_x_ = lx;
    log_xp_ = lxp;
}

Mask TWalk::draw_subset(std::mt19937_64& rng) const
{
    Mask phi(x_.size());
    for (Eigen::Index i = 0; i < phi.size(); ++i) {
        phi(i) = uniform01(rng) < subset_prob_;
    }
    return phi;
}

bool TWalk::step(std::mt19937_64& rng)
{
    const double u = uniform01(rng);
    double cum = 0.0;
    for (std::size_t k = 0; k < opts_.kernel_probs.size(); ++k) {
        cum += opts_.kernel_probs[k];
        if (u < cum) {
            return step(rng, static_cast<TwalkKernel>(k));
        }
    }
    return step(rng, TwalkKernel::Hop);
}

bool TWalk::step(std::mt19937_64& rng, TwalkKernel kernel)
{
    // Move either x (pivot x') or x' (pivot x) with equal probability.
    const bool move_x = uniform01(rng) < 0.5;
    Eigen::VectorXd& mover = move_x ? x_ : xp_;
    const Eigen::VectorXd& pivot = move_x ? xp_ : x_;
    double& log_mover = move_x ? log_x_ : log_xp_;

    const Mask phi = draw_subset(rng);
    const auto nphi = static_cast<double>(phi.count());
    Eigen::VectorXd y = mover;
    // log of the proposal-density correction q(mover | y) / q(y | mover), or
    // of the Jacobian factor for the traverse move.
    double log_correction = 0.0;

    switch (kernel) {
    case TwalkKernel::Walk: {
        const double aw = opts_.walk_aperture;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            if (phi(i)) {
                const double v = uniform01(rng);
                const double z = (aw / (1.0 + aw)) * (aw * v * v + 2.0 * v - 1.0);
                y(i) = mover(i) + (mover(i) - pivot(i)) * z;
            }
        }
        if (((y - pivot).array() == 0.0).any()) {
            return false;
        }
        break;
    }
    case TwalkKernel::Traverse: {
        const double beta = draw_traverse_factor(opts_.traverse_scale, rng);
        if (nphi == 0.0) {
            return true;
        }
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            if (phi(i)) {
                y(i) = pivot(i) + beta * (pivot(i) - mover(i));
            }
        }
        log_correction = (nphi - 2.0) * std::log(beta);
        break;
    }
    case TwalkKernel::Blow: {
        if (nphi == 0.0) {
            return true;
        }
        const double sigma = masked_max_gap(pivot, mover, phi);
        if (!(sigma > 0.0)) {
            return false;
        }
        std::normal_distribution<double> normal(0.0, 1.0);
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            if (phi(i)) {
                y(i) = pivot(i) + sigma * normal(rng);
            }
        }
        if (((y - pivot).array() == 0.0).any()) {
            return false;
        }
        const double sigma_back = masked_max_gap(pivot, y, phi);
        const double nll_forward = masked_normal_nll(y, pivot, sigma, phi);
        const double nll_backward = masked_normal_nll(mover, pivot, sigma_back, phi);
        log_correction = nll_forward - nll_backward;
        break;
    }
    case TwalkKernel::Hop: {
        if (nphi == 0.0) {
            return true;
        }
        const double sigma = masked_max_gap(pivot, mover, phi) / 3.0;
        if (!(sigma > 0.0)) {
            return false;
        }
        std::normal_distribution<double> normal(0.0, 1.0);
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            if (phi(i)) {
                y(i) = mover(i) + sigma * normal(rng);
            }
        }
        if (((y - pivot).array() == 0.0).any()) {
            return false;
        }
        const double sigma_back = masked_max_gap(pivot, y, phi) / 3.0;
        const double nll_forward = masked_normal_nll(y, mover, sigma, phi);
        const double nll_backward = masked_normal_nll(mover, y, sigma_back, phi);
        log_correction = nll_forward - nll_backward;
        break;
    }
    }

    const double log_y = target_(y);
    if (!std::isfinite(log_y)) {
        return false;
    }
    const double log_accept = log_y - log_mover + log_correction;
    if (log_accept >= 0.0 || std::log(uniform01(rng)) < log_accept) {
        mover = std::move(y);
        log_mover = log_y;
        return true;
    }
    return false;
}

PosteriorSamples run_mcmc(const LogDensity& target, const Eigen::VectorXd& init_a, const Eigen::VectorXd& init_b,
                          const SamplerConfig& cfg, std::mt19937_64& rng)
{
    cfg.validate();
    TWalk walker(target, init_a, init_b, cfg.twalk);

    const Eigen::Index n_keep = cfg.retained();
    PosteriorSamples out;
    out.draws.resize(n_keep, walker.dim());
    out.log_posts.resize(n_keep);

    std::array<std::int64_t, 4> tried{};
    std::array<std::int64_t, 4> accepted{};
    std::int64_t total_accepted = 0;
    Eigen::Index row = 0;

    const auto& probs = cfg.twalk.kernel_probs;
    for (std::int64_t it = 0; it < cfg.iters; ++it) {
        const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        std::size_t k = 0;
        double cum = probs[0];
        while (k + 1 < probs.size() && u >= cum) {
            cum += probs[++k];
        }
        const bool ok = walker.step(rng, static_cast<TwalkKernel>(k));
        ++tried[k];
        if (ok) {
            ++accepted[k];
            ++total_accepted;
        }
        if (it >= cfg.burn_in && (it - cfg.burn_in) % cfg.thin == 0) {
            out.draws.row(row) = walker.x().transpose();
            out.log_posts(row) = walker.log_x();
            ++row;
        }
    }

    out.acceptance_rate = static_cast<double>(total_accepted) / static_cast<double>(cfg.iters);
    for (std::size_t k = 0; k < 4; ++k) {
        out.kernel_acceptance[k] =
            tried[k] > 0 ? static_cast<double>(accepted[k]) / static_cast<double>(tried[k]) : 0.0;
    }
    out.iat = Eigen::VectorXd::Constant(walker.dim(), std::numeric_limits<double>::quiet_NaN());
    if (static_cast<std::size_t>(n_keep) >= kMinIatLength) {
        for (Eigen::Index j = 0; j < walker.dim(); ++j) {
            const Eigen::VectorXd col = out.draws.col(j);
            out.iat(j) = estimate_iat(std::span<const double>(col.data(), static_cast<std::size_t>(col.size())));
        }
    }
    return out;
}

double estimate_iat(std::span<const double> chain)
{
    if (chain.size() < kMinIatLength) {
        throw std::invalid_argument("estimate_iat: chain must have at least " + std::to_string(kMinIatLength) +
                                    " values");
    }
    const Eigen::Map<const Eigen::VectorXd> x(chain.data(), static_cast<Eigen::Index>(chain.size()));
    const Eigen::Index n = x.size();
    const Eigen::VectorXd centred = x.array() - x.mean();
    const double gamma0 = centred.squaredNorm() / static_cast<double>(n);
    if (!(gamma0 > 0.0)) {
        return std::numeric_limits<double>::infinity();
    }
    auto autocov = [&](Eigen::Index lag) {
        return centred.head(n - lag).dot(centred.tail(n - lag)) / static_cast<double>(n);
    };

    // Geyer: sum pairs Gamma_m = rho(2m) + rho(2m+1) while they stay positive.
    double tau = -1.0;
    for (Eigen::Index m = 0; 2 * m + 1 < n; ++m) {
        const double pair = (autocov(2 * m) + autocov(2 * m + 1)) / gamma0;
        if (pair <= 0.0) {
            break;
        }
        tau += 2.0 * pair;
    }
    return std::max(1.0, tau);
}

} // namespace epiassim
