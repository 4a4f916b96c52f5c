#ifndef TBCTL_MODEL_HPP
#define TBCTL_MODEL_HPP

#include <array>
#include <span>

namespace tbctl {

/// Compartment populations at one instant: uninfected, latently infected,
/// active disease, under treatment, recovered.
struct StateVec {
    double U = 0.0;
    double Tl = 0.0;
    double Td = 0.0;
    double Tt = 0.0;
    double R = 0.0;

    double total() const { return U + Tl + Td + Tt + R; }
    bool all_finite() const;
    bool nonnegative(double slack = 0.0) const;

    std::array<double, 5> to_array() const { return {U, Tl, Td, Tt, R}; }
    static StateVec from_array(std::span<const double> a);
};

/// Rate constants of the transmission model. All rates are per month; b is a
/// birth inflow in persons per month.
struct ModelParams {
    double lambda1 = 0.0; ///< uninfected -> active disease
    double lambda2 = 0.0; ///< uninfected -> latent (mass action with Tl)
    double lambda3 = 0.0; ///< latent -> active disease
    double lambda4 = 0.0; ///< active disease -> treatment
    double lambda5 = 0.0; ///< treatment -> recovered
    double lambda6 = 0.0; ///< treatment default back to active disease
    double lambda7 = 0.0; ///< recurrence from recovered
    double b = 0.0;       ///< birth inflow
    double sigma = 0.0;   ///< natural cure rate of active disease
    double mu1 = 0.0, mu2 = 0.0, mu3 = 0.0, mu4 = 0.0, mu5 = 0.0; ///< deaths per compartment

    bool valid() const;          // finite, all >= 0
    void require_valid() const;  // throws InvalidInputError

    /// min{mu3 + sigma, mu1, mu2, mu4, mu5}; controls the feasible bound b/omega.
    double omega() const;

    /// Literature baseline used throughout the simulation studies.
    static ModelParams baseline();
};

struct EquilibriumPoint {
    StateVec state;
    double residual_norm = 0.0;     ///< max-norm of base_rhs at the point
    bool is_valid_equilibrium = false;
};

/// Max-norm tolerance below which a point counts as an equilibrium.
inline constexpr double kEquilibriumTol = 1e-8;

/// Right-hand side of the uncontrolled five-compartment system.
StateVec base_rhs(const ModelParams& p, const StateVec& s);

/// 5x5 Jacobian of base_rhs with respect to the state, row-major.
std::array<std::array<double, 5>, 5> base_rhs_jacobian(const ModelParams& p, const StateVec& s);

/// Basic reproduction number, closed form: lambda2*b / ((lambda1+mu1)(lambda3+mu2)).
double r0_closed_form(const ModelParams& p);

/// Basic reproduction number as the spectral radius of F * V^-1 for the
/// three infected compartments, evaluated at the disease-free point. V uses
/// the standard outflow-positive sign convention. Agrees with the closed
/// form to ~1e-10 relative.
double r0_next_generation(const ModelParams& p);

/// The disease-free point (b/(lambda1+mu1), 0, 0, 0, 0). Its residual is
/// reported honestly: the point is not a fixed point when lambda1 > 0.
EquilibriumPoint disease_free_equilibrium(const ModelParams& p);

/// Closed-form endemic point used to seed the refinement.
StateVec endemic_seed(const ModelParams& p);

/// Endemic equilibrium: closed-form seed refined by a damped Newton iteration
/// on base_rhs. Throws ConvergenceError when the residual cannot be brought
/// below tolerance within the iteration cap.
EquilibriumPoint endemic_equilibrium(const ModelParams& p);

/// Asymptotic population bound b/omega.
double feasible_bound(const ModelParams& p);

} // namespace tbctl

#endif
