#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <concepts>
#include <stdexcept>
#include <string>

#include "epiassim/epimodel.hpp"
#include "epiassim/errors.hpp"

namespace epiassim {

/// Number of quadrature samples per day, including both day endpoints.
inline constexpr Eigen::Index kQuadNodes = 10;
inline constexpr Eigen::Index kQuadPanels = kQuadNodes - 1;
inline constexpr double kDefaultStep = 0.1;

// Negative components smaller than this fraction of N are rounding noise and
// are zeroed; anything larger means the solution has blown up.
inline constexpr double kClampTolerance = 1e-6;

/// Solution of the staged ODE on an integer day grid.
template <typename Scalar = double>
struct Trajectory {
    int t0 = 0;
    /// Column j holds the state at day t0 + j.
    Eigen::Matrix<Scalar, kNumCompartments, Eigen::Dynamic> states;
    /// Column j holds E2 at the kQuadNodes equally spaced points of
    /// [t0 + j, t0 + j + 1], endpoints included.
    Eigen::Matrix<Scalar, kQuadNodes, Eigen::Dynamic> e2_nodes;

    Eigen::Index num_days() const { return states.cols() - 1; }
    int t_end() const { return t0 + static_cast<int>(num_days()); }

    StateVector<Scalar> at_day(int day) const { return states.col(day - t0); }
};

namespace detail {

template <typename Scalar>
void rk4_step(StateVector<Scalar>& x, const EpiParams<Scalar>& p, Scalar h)
{
    const StateVector<Scalar> k1 = rhs(x, p);
    const StateVector<Scalar> k2 = rhs((x + (h / 2) * k1).eval(), p);
    const StateVector<Scalar> k3 = rhs((x + (h / 2) * k2).eval(), p);
    const StateVector<Scalar> k4 = rhs((x + h * k3).eval(), p);
    x += (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
}

template <typename Scalar>
void clamp_or_throw(StateVector<Scalar>& x, Scalar N, double t)
{
    if (!x.allFinite()) {
        throw IntegrationDiverged(t, "non-finite state at day " + std::to_string(t));
    }
    const Scalar floor = -Scalar(kClampTolerance) * N;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (x(i) < Scalar(0)) {
            if (x(i) < floor) {
                throw IntegrationDiverged(t, std::string("compartment ") +
                                                 compartment_name(static_cast<Compartment>(i)) +
                                                 " went negative at day " + std::to_string(t));
            }
            x(i) = Scalar(0);
        }
    }
}

} // namespace detail

/// Number of RK4 sub-steps per quadrature panel for a requested maximum step.
inline int substeps_per_panel(double step)
{
    const double panel = 1.0 / static_cast<double>(kQuadPanels);
    return std::max(1, static_cast<int>(std::ceil(panel / step - 1e-9)));
}

/// Fixed-step classical RK4 from day t0 to day t_end. `params_at(day)` gives
/// the parameters in force during [day, day + 1), which allows piecewise
/// constant contact rates. Steps never straddle a quadrature node, so each
/// day is split into kQuadPanels panels of ceil(panel / step) equal steps.
template <typename Scalar, typename ParamsAt>
    requires std::invocable<ParamsAt&, int>
Trajectory<Scalar> integrate(const StateVector<Scalar>& x0, ParamsAt&& params_at, int t0, int t_end,
                             double step = kDefaultStep)
{
    if (!(step > 0.0)) {
        throw std::invalid_argument("integrate: step must be positive");
    }
    if (t_end <= t0) {
        throw std::invalid_argument("integrate: t_end must exceed t0");
    }
    const int n_days = t_end - t0;
    const int n_sub = substeps_per_panel(step);
    const Scalar h = Scalar(1) / Scalar(kQuadPanels * n_sub);

    Trajectory<Scalar> traj;
    traj.t0 = t0;
    traj.states.resize(kNumCompartments, n_days + 1);
    traj.e2_nodes.resize(kQuadNodes, n_days);

    StateVector<Scalar> x = x0;
    traj.states.col(0) = x;
    for (int d = 0; d < n_days; ++d) {
        const EpiParams<Scalar>& p = params_at(t0 + d);
        traj.e2_nodes(0, d) = x(idx(Compartment::E2));
        for (Eigen::Index node = 1; node < kQuadNodes; ++node) {
            for (int s = 0; s < n_sub; ++s) {
                detail::rk4_step(x, p, h);
            }
            const double t = t0 + d + static_cast<double>(node) / kQuadPanels;
            if (!x.allFinite()) {
                throw IntegrationDiverged(t, "non-finite state at day " + std::to_string(t));
            }
            traj.e2_nodes(node, d) = std::max(Scalar(0), x(idx(Compartment::E2)));
        }
        detail::clamp_or_throw(x, p.N, static_cast<double>(t0 + d + 1));
        traj.e2_nodes(kQuadNodes - 1, d) = x(idx(Compartment::E2));
        traj.states.col(d + 1) = x;
    }
    return traj;
}

template <typename Scalar>
Trajectory<Scalar> integrate(const StateVector<Scalar>& x0, const EpiParams<Scalar>& p, int t0, int t_end,
                             double step = kDefaultStep)
{
    return integrate(x0, [&p](int) -> const EpiParams<Scalar>& { return p; }, t0, t_end, step);
}

/// Composite trapezoid rule over one unit day from kQuadNodes equally spaced
/// samples (endpoints included).
template <typename Derived>
typename Derived::Scalar trapezoid_day_integral(const Eigen::DenseBase<Derived>& samples)
{
    using Scalar = typename Derived::Scalar;
    if (samples.size() != kQuadNodes) {
        throw std::invalid_argument("trapezoid_day_integral: expected " + std::to_string(kQuadNodes) +
                                    " samples, got " + std::to_string(samples.size()));
    }
    const Scalar width = Scalar(1) / Scalar(kQuadPanels);
    const Scalar interior = samples.segment(1, kQuadNodes - 2).sum();
    return width * (interior + (samples(0) + samples(kQuadNodes - 1)) / Scalar(2));
}

} // namespace epiassim
