#ifndef TBCTL_CONTROL_HPP
#define TBCTL_CONTROL_HPP

#include "tbctl/integrate.hpp"
#include "tbctl/model.hpp"

#include <array>
#include <string>
#include <vector>

namespace tbctl {

/// The nine intervention intensities. Index order is fixed throughout:
/// mu1T, mu2T, mu3T, mu1M, mu2M, mu3M, mu1D, mu2D, mu3D. Component 1/2/3 of
/// each family acts on Tl / Td / Tt respectively.
struct ControlVec {
    double mu1T = 0.0, mu2T = 0.0, mu3T = 0.0;
    double mu1M = 0.0, mu2M = 0.0, mu3M = 0.0;
    double mu1D = 0.0, mu2D = 0.0, mu3D = 0.0;

    std::array<double, 9> to_array() const {
        return {mu1T, mu2T, mu3T, mu1M, mu2M, mu3M, mu1D, mu2D, mu3D};
    }
    static ControlVec from_array(std::span<const double> a);

    double tl_outflow() const { return mu1T + mu1M + mu1D; }
    double td_outflow() const { return mu2T + mu2M + mu2D; }
    double tt_outflow() const { return mu3T + mu3M + mu3D; }
};

inline constexpr std::array<const char*, 9> kControlNames = {
    "mu1T", "mu2T", "mu3T", "mu1M", "mu2M", "mu3M", "mu1D", "mu2D", "mu3D"};

/// Which intervention families are active in a scenario.
struct ScenarioMask {
    bool tpt = false;
    bool mn = false;
    bool d = false;

    bool any() const { return tpt || mn || d; }
    bool component_active(int index) const; // by ControlVec index order
    std::string token() const;              // "none", "tpt", "tpt+mn+d", ...
    std::string label() const;              // "None", "TPT, MN, and D", ...
    static ScenarioMask parse(const std::string& token);
    static std::array<ScenarioMask, 8> all();
    bool operator==(const ScenarioMask&) const = default;
};

/// Per-component control upper bounds. A masked-off intervention has all
/// three of its bounds equal to zero.
struct ControlBounds {
    std::array<double, 9> upper{};

    static ControlBounds uniform(double bound);
    ControlBounds masked(const ScenarioMask& mask) const;
    void validate() const;
};

struct CostWeights {
    double A1 = 55.0;
    double A2 = 30.0;
    double A3 = 100.0;
    void validate() const; // all strictly positive
};

struct AdjointVec {
    double lamU = 0.0, lamTl = 0.0, lamTd = 0.0, lamTt = 0.0, lamR = 0.0;
    std::array<double, 5> to_array() const { return {lamU, lamTl, lamTd, lamTt, lamR}; }
    static AdjointVec from_array(std::span<const double> a);
};

struct FbsConfig {
    double rel_tol = 1e-3;
    double abs_tol = 1e-6;
    double relaxation = 0.5;
    int max_iterations = 200;
    void validate() const;
};

struct OcSolution {
    Trajectory states;
    Trajectory adjoints;
    Trajectory controls;
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> objective_history; ///< objective value per sweep iteration
};

/// Controlled right-hand side: the uncontrolled dynamics plus the control
/// sums as extra outflow rates on Tl, Td and Tt.
StateVec controlled_rhs(const ModelParams& p, const ControlVec& u, const StateVec& s);

/// Running cost at one instant: weighted squared controls of the active
/// families plus the infected-compartment total.
double running_cost(const StateVec& s, const ControlVec& u, const CostWeights& w,
                    const ScenarioMask& mask);

/// Composite-trapezoid quadrature of the running cost over the shared grid.
double cost_functional(const Trajectory& states, const Trajectory& controls, const CostWeights& w,
                       const ScenarioMask& mask);

/// Running cost plus the adjoint-weighted controlled dynamics.
double hamiltonian(const StateVec& s, const AdjointVec& a, const ControlVec& u,
                   const ModelParams& p, const CostWeights& w);

/// Costate equations d(lambda)/dt = -dH/d(state).
AdjointVec adjoint_rhs(const ModelParams& p, const ControlVec& u, const StateVec& s,
                       const AdjointVec& a);

/// Pointwise Hamiltonian minimiser: each component is lambda*state/(2*weight)
/// clamped to [0, bound]; masked-off components are zero.
ControlVec optimal_control_update(const StateVec& s, const AdjointVec& a, const CostWeights& w,
                                  const ControlBounds& bounds, const ScenarioMask& mask);

/// Forward-backward sweep: forward RK4 of the controlled states, backward RK4
/// of the adjoints from zero terminal values, pointwise control update, then
/// relaxation, iterated until the per-component l1 change passes tolerance.
/// The stored controls are the exact pointwise update of the returned state
/// and adjoint trajectories.
OcSolution forward_backward_sweep(const ModelParams& p, const CostWeights& w,
                                  const ControlBounds& bounds, const ScenarioMask& mask,
                                  const TimeGrid& grid, const StateVec& y0,
                                  const FbsConfig& config = {});

/// Per-family control sums: columns muT, muM, muD and their grand total.
Trajectory aggregate_controls(const Trajectory& controls);

} // namespace tbctl

#endif
