#pragma once

#include <Eigen/Core>

#include <cmath>
#include <optional>
#include <string>

#include "epiassim/errors.hpp"

namespace epiassim {

/// Compartments of the staged SEIR-type model. E, O and U are each split
/// into two serial sub-stages so their residence times are Erlang(2).
enum class Compartment : Eigen::Index { S = 0, E1, E2, O1, O2, U1, U2, R, D, Count };

inline constexpr Eigen::Index kNumCompartments = static_cast<Eigen::Index>(Compartment::Count);
inline constexpr int kErlangShape = 2;

constexpr Eigen::Index idx(Compartment c) { return static_cast<Eigen::Index>(c); }

template <typename Scalar = double>
using StateVector = Eigen::Matrix<Scalar, kNumCompartments, 1>;

inline const char* compartment_name(Compartment c)
{
    switch (c) {
    case Compartment::S: return "S";
    case Compartment::E1: return "E1";
    case Compartment::E2: return "E2";
    case Compartment::O1: return "O1";
    case Compartment::O2: return "O2";
    case Compartment::U1: return "U1";
    case Compartment::U2: return "U2";
    case Compartment::R: return "R";
    case Compartment::D: return "D";
    default: return "?";
    }
}

template <typename Derived>
typename Derived::Scalar total(const Eigen::MatrixBase<Derived>& x)
{
    return x.sum();
}

template <typename Derived>
bool is_valid_state(const Eigen::MatrixBase<Derived>& x)
{
    return x.allFinite() && (x.array() >= 0).all();
}

// Aggregate masses (sum over Erlang sub-stages).
template <typename Derived>
typename Derived::Scalar exposed(const Eigen::MatrixBase<Derived>& x)
{
    return x(idx(Compartment::E1)) + x(idx(Compartment::E2));
}

template <typename Derived>
typename Derived::Scalar observed_infectious(const Eigen::MatrixBase<Derived>& x)
{
    return x(idx(Compartment::O1)) + x(idx(Compartment::O2));
}

template <typename Derived>
typename Derived::Scalar unobserved_infectious(const Eigen::MatrixBase<Derived>& x)
{
    return x(idx(Compartment::U1)) + x(idx(Compartment::U2));
}

/// Disease and behaviour parameters. beta, omega and g are inferred per
/// window; the remaining fields are fixed constants of the model.
template <typename Scalar = double>
struct EpiParams {
    Scalar beta{0.5};
    Scalar omega{0.5};
    Scalar g{0.05};
    Scalar f{0.8};
    Scalar k_obs{1.0};
    Scalar sigma1{1.0 / 5.0};
    Scalar sigma2{1.0 / 14.0};
    Scalar gamma{1.0 / 7.0};
    Scalar N{1.0e6};

    // Per-sub-stage exit rates. Each of the two stages leaves at twice the
    // aggregate rate so the total sojourn keeps the aggregate mean.
    Scalar exposed_stage_rate() const { return Scalar(kErlangShape) * sigma1; }
    Scalar observed_stage_rate() const { return Scalar(kErlangShape) * sigma2; }
    Scalar unobserved_stage_rate() const { return Scalar(kErlangShape) * gamma; }

    bool valid() const
    {
        auto in_unit = [](Scalar v) { return v > Scalar(0) && v < Scalar(1); };
        return beta > Scalar(0) && sigma1 > Scalar(0) && sigma2 > Scalar(0) && gamma > Scalar(0) &&
               k_obs >= Scalar(0) && in_unit(f) && in_unit(g) && in_unit(omega) && N >= Scalar(1);
    }
};

/// Aggregate initial masses. S(0) is derived from omega*N.
template <typename Scalar = double>
struct InitialConditions {
    Scalar E0{0};
    Scalar O0{0};
    Scalar U0{0};
    Scalar R0{0};
    Scalar D0{0};
};

/// Per-susceptible infection rate (U + k O) beta / N. The denominator is the
/// full census population, not omega*N.
template <typename Derived, typename Scalar>
Scalar force_of_infection(const Eigen::MatrixBase<Derived>& x, const EpiParams<Scalar>& p)
{
    return (unobserved_infectious(x) + p.k_obs * observed_infectious(x)) * p.beta / p.N;
}

/// Inter-compartment flows of the staged system, all non-negative for x >= 0.
enum class Flow : Eigen::Index {
    Infection = 0,  // S  -> E1
    ExposedStage,   // E1 -> E2
    ToObserved,     // E2 -> O1
    ToUnobserved,   // E2 -> U1
    ObservedStage,  // O1 -> O2
    ObservedRecover,// O2 -> R
    ObservedDeath,  // O2 -> D
    UnobservedStage,// U1 -> U2
    UnobservedRecover, // U2 -> R
    Count
};

inline constexpr Eigen::Index kNumFlows = static_cast<Eigen::Index>(Flow::Count);

template <typename Scalar = double>
using FlowVector = Eigen::Matrix<Scalar, kNumFlows, 1>;

template <typename Derived, typename Scalar>
FlowVector<Scalar> flows(const Eigen::MatrixBase<Derived>& x, const EpiParams<Scalar>& p)
{
    using C = Compartment;
    const Scalar lambda = force_of_infection(x, p);
    const Scalar r_e = p.exposed_stage_rate();
    const Scalar r_o = p.observed_stage_rate();
    const Scalar r_u = p.unobserved_stage_rate();

    FlowVector<Scalar> fl;
    fl << lambda * x(idx(C::S)),
          r_e * x(idx(C::E1)),
          p.f * r_e * x(idx(C::E2)),
          (Scalar(1) - p.f) * r_e * x(idx(C::E2)),
          r_o * x(idx(C::O1)),
          (Scalar(1) - p.g) * r_o * x(idx(C::O2)),
          p.g * r_o * x(idx(C::O2)),
          r_u * x(idx(C::U1)),
          r_u * x(idx(C::U2));
    return fl;
}

/// Right-hand side of the staged ODE. Every flow leaves one compartment and
/// enters another, so the components of the result sum to zero.
template <typename Derived, typename Scalar>
StateVector<Scalar> rhs(const Eigen::MatrixBase<Derived>& x, const EpiParams<Scalar>& p)
{
    using C = Compartment;
    using F = Flow;
    const FlowVector<Scalar> fl = flows(x, p);
    auto at = [&fl](F f) { return fl(static_cast<Eigen::Index>(f)); };

    StateVector<Scalar> dx;
    dx(idx(C::S)) = -at(F::Infection);
    dx(idx(C::E1)) = at(F::Infection) - at(F::ExposedStage);
    dx(idx(C::E2)) = at(F::ExposedStage) - at(F::ToObserved) - at(F::ToUnobserved);
    dx(idx(C::O1)) = at(F::ToObserved) - at(F::ObservedStage);
    dx(idx(C::O2)) = at(F::ObservedStage) - at(F::ObservedRecover) - at(F::ObservedDeath);
    dx(idx(C::U1)) = at(F::ToUnobserved) - at(F::UnobservedStage);
    dx(idx(C::U2)) = at(F::UnobservedStage) - at(F::UnobservedRecover);
    dx(idx(C::R)) = at(F::ObservedRecover) + at(F::UnobservedRecover);
    dx(idx(C::D)) = at(F::ObservedDeath);
    return dx;
}

/// Builds x(0) from aggregate initial masses, or nullopt when the derived
/// S(0) = omega*N - (E0 + O0 + U0 + R0) would be negative. D0 is not
/// subtracted.
template <typename Scalar>
std::optional<StateVector<Scalar>> try_assemble_initial_state(const InitialConditions<Scalar>& ic,
                                                              const EpiParams<Scalar>& p)
{
    using C = Compartment;
    if (!(ic.E0 >= 0 && ic.O0 >= 0 && ic.U0 >= 0 && ic.R0 >= 0 && ic.D0 >= 0)) {
        return std::nullopt;
    }
    const Scalar s0 = p.omega * p.N - (ic.E0 + ic.O0 + ic.U0 + ic.R0);
    if (!(s0 >= Scalar(0))) {
        return std::nullopt;
    }
    StateVector<Scalar> x;
    x(idx(C::S)) = s0;
    x(idx(C::E1)) = x(idx(C::E2)) = ic.E0 / Scalar(2);
    x(idx(C::O1)) = x(idx(C::O2)) = ic.O0 / Scalar(2);
    x(idx(C::U1)) = x(idx(C::U2)) = ic.U0 / Scalar(2);
    x(idx(C::R)) = ic.R0;
    x(idx(C::D)) = ic.D0;
    return x;
}

template <typename Scalar>
StateVector<Scalar> assemble_initial_state(const InitialConditions<Scalar>& ic, const EpiParams<Scalar>& p)
{
    auto x = try_assemble_initial_state(ic, p);
    if (!x) {
        throw InfeasibleParameters("initial masses exceed the effective population omega*N");
    }
    return *x;
}

} // namespace epiassim
